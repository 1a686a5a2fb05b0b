from qpredec.dem import NoiseConfig, build_phenomenological_dem
from qpredec.fixtures import load_repetition_code, load_steane_code

REPETITION = load_repetition_code()
STEANE = load_steane_code()

REPETITION_NOISE = NoiseConfig(p_data=0.01, p_meas=0.002, rounds=3)
REPETITION_DEM = build_phenomenological_dem(REPETITION, "Z", REPETITION_NOISE)

STEANE_NOISE = NoiseConfig(p_data=1e-3, p_meas=2e-4, rounds=3)
STEANE_DEM = build_phenomenological_dem(STEANE, "Z", STEANE_NOISE)
