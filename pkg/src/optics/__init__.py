# src/optics/__init__.py
from src.optics.jones import WavePlatePair, jones_hwp, jones_qwp, waveplate_angles_for
from src.optics.utba import (AnalyzerConfig, SlotAmplitudes, TimeBinQubit, infer_paddle_angle,
                             joint_middle_state, middle_slot_click_probability,
                             paddle_alignment_fraction, utba_convert)
