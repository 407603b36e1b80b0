"""
Reference settings of the pruning method.
"""

# Budget coefficient of the adaptive visual-token budget
DEFAULT_ALPHA = 1.0
# Larger coefficient used for backbones whose drift is uniformly small
QWEN_ALPHA = 1.5
# Number of calibration samples (image-text pairs)
CALIBRATION_SIZE = 128
# Unstructured sparsity levels
DEFAULT_SPARSITIES = (0.5, 0.6)
# Semi-structured patterns
NM_PATTERNS = ("2:4", "4:8")
# Sparsity levels of the decoupled-pathway probe
PROBE_SPARSITIES = (0.5, 0.6)
# Significant digits kept in reports and CSV tables
REPORT_DIGITS = 9
# Environment variable capping the worker pool
THREADS_ENV = "ATV_THREADS"
