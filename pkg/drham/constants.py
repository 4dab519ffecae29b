MODEL_SCHEMA = "drham-model/1"
REPORT_SCHEMA = "drham-report/1"

JOBS_ENV_VAR = "DRHAM_JOBS"

DEFAULT_GENUS = 3
DEFAULT_SEED = 0
DEFAULT_CASES = 30
DEFAULT_JOBS = 1

# recursion levels checked per verify target
DEFAULT_D_MAX = {
    'kdv': 3,
    'rspin3': 1,
    'rspin4': 1,
    'rspin5': 0,
    'cp1': 0,
    'genus0': 3,
    'central': 0,
    'lemma': 0,
}

# u-polynomial degree kept when exponential generators are expanded
DEFAULT_DEGREE_CAP = 6

MIURA_MAX_ITERATIONS = 64

# extra pseudo-differential depth on top of the automatic estimate
PDO_DEPTH_MARGIN = 4

MUTATIONS = ('adjoint_sign',)

SCOPE_EXACT = "exact"
VERDICT_PASS = "pass"
VERDICT_FAIL = "fail"
VERDICT_ERROR = "error"

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_CONFIGURATION = 3


def eps_scope(order: int) -> str:
    return f"eps-order {order}"


def degree_scope(order: int, degree: int) -> str:
    return f"eps-order {order}, u-degree {degree}"
