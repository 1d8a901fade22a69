# src/qstate/__init__.py
from src.qstate.states import (AXIS_X, AXIS_Y, AXIS_Z, BlochSetting, CorrelationTensor,
                               TwoQubitState, check_visibility, maximally_mixed, phi_plus,
                               white_noise_mix)
from src.qstate.measurement import (OUTCOME_PAIRS, correlation, correlation_tensor,
                                    joint_probability, outcome_distribution)
from src.qstate.chsh import (LOCAL_BOUND, TSIRELSON_BOUND, chsh_from_tensor, chsh_value,
                             horodecki_max, optimal_chsh, optimal_partner_settings)
