import warnings

from qpredec.dem import merge_duplicates, parse_dem
from qpredec.pipeline import compile_pipeline
from tests.dem.common import REPETITION_DEM, STEANE_DEM
from tests.pipeline.common import REPETITION_PIPELINE, STEANE_PIPELINE, TIMEOUT

REPETITION_MERGED = merge_duplicates(REPETITION_DEM)
STEANE_MERGED = merge_duplicates(STEANE_DEM)

# One detector explained equally well by two mechanisms: BP never settles on it,
# while two single-detector stages resolve every firing.
AMBIGUOUS_DEM = parse_dem("""
detector(0, 0) D0
logical_observable L0
error(0.01) D0 L0
error(0.01) D0
""")
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    AMBIGUOUS_PIPELINE, _ = compile_pipeline(AMBIGUOUS_DEM, timeout=TIMEOUT)

__all__ = [
    "AMBIGUOUS_DEM",
    "AMBIGUOUS_PIPELINE",
    "REPETITION_MERGED",
    "REPETITION_PIPELINE",
    "STEANE_MERGED",
    "STEANE_PIPELINE",
]
