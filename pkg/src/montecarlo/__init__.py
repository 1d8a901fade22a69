# src/montecarlo/__init__.py
from src.montecarlo.channel import (MisalignmentTrace, PhaseDriftTrace, db_to_transmittance,
                                    stabilization_misalignment)
from src.montecarlo.coincidences import default_slot_offset, extract_coincidences
from src.montecarlo.simulator import SimulationPlan, simulate_run
