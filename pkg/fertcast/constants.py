ENV_VAR_OUTPUT_DIR = "FERTCAST_OUTPUT_DIR"

# Tolerances shared by every module
ABS_TOLERANCE = 1e-9
DEGENERATE_STD_RATIO = 1e-12
PREDICTION_STD_RATIO = 1e-9

# Population (1/n) standard deviation. Exports using 1/(n-1) need ddof=1
DEFAULT_STD_DDOF = 0
EXPORT_ZSCORE_TOLERANCE = 1e-3
EXPORT_R_TOLERANCE = 0.01

DEFAULT_INTENSITY_SCALE = 1000.0
DEFAULT_REFERENCE_YEAR = 2015
DEFAULT_TOP_K = 50
DEFAULT_MAX_TERMS = 5
MIN_REGIONS = 3

DEFAULT_LAMBDA_POINTS = 100
DEFAULT_LAMBDA_RATIO = 1e-4
DEFAULT_LASSO_MAX_SWEEPS = 10000
DEFAULT_LASSO_TOLERANCE = 1e-7
LASSO_ZERO_SNAP = 1e-12

MODEL_FAMILY_CONSTANT = "constant"
MODEL_FAMILY_OLS_SINGLE = "ols-single"
MODEL_FAMILY_OLS_MULTI = "ols-multi"
MODEL_FAMILY_LASSO = "lasso"
MODEL_FAMILIES = [
    MODEL_FAMILY_CONSTANT,
    MODEL_FAMILY_OLS_SINGLE,
    MODEL_FAMILY_OLS_MULTI,
    MODEL_FAMILY_LASSO,
]
# Preference order used to break exact ties when choosing a model
CANDIDATE_FAMILY_PREFERENCE = [
    MODEL_FAMILY_LASSO,
    MODEL_FAMILY_OLS_MULTI,
    MODEL_FAMILY_OLS_SINGLE,
]

SINGLE_TERM_MODE_CV = "cv"
SINGLE_TERM_MODE_TOP = "top"

GROUND_TRUTH_COLUMNS = ["region", "variable", "births", "women_15_50"]
GROUND_TRUTH_YEAR_COLUMN = "year"
TRENDS_COLUMNS = ["month", "term", "volume"]
EVALUATION_COLUMNS = ["variable", "family", "r", "rmse_x1000", "smape_pct"]
TREND_COLUMNS = ["variable", "r"]
PLOT_COLUMNS = ["year", "predicted", "truth", "predicted_rescaled", "truth_rescaled"]
SPARSIFICATION_COLUMNS = ["variable", "term", "status"]

FILE_NAME_RANKED_TERMS = "ranked_terms.csv"
FILE_NAME_SELECTED_TERMS = "selected_terms.csv"
FILE_NAME_EVALUATION = "evaluation.csv"
FILE_NAME_MODEL = "model.txt"
FILE_NAME_SPARSIFICATION = "sparsification.csv"
FILE_NAME_TREND = "trend.csv"
FILE_NAME_PLOT_DATA = "plot_data.csv"
FILE_NAME_TRENDS_SUMMARY = "trends.csv"

FILE_NAME_SYNTH_GROUND_TRUTH = "ground_truth.csv"
FILE_NAME_SYNTH_CORPUS = "corpus.csv"
FILE_NAME_SYNTH_TRENDS = "trends_monthly.csv"
FILE_NAME_SYNTH_LEXICON = "lexicon.yaml"
FILE_NAME_SYNTH_MANIFEST = "manifest.json"

# Word stems a term must start one of its words with to be considered
# fertility related
FERTILITY_LEXICON_ALLOW = [
    "abort",
    "baby",
    "babies",
    "bible",
    "biblical",
    "birth",
    "breast",
    "chlamydia",
    "constipation",
    "contracept",
    "crib",
    "diaper",
    "fertil",
    "gonorrhea",
    "infant",
    "milk",
    "mother",
    "names",
    "newborn",
    "nursing",
    "paternity",
    "postpartum",
    "potty",
    "pregnan",
    "stroller",
    "toddler",
    "transmitted",
    "tummy",
    "udder",
    "womb",
]
FERTILITY_LEXICON_BLOCK = ["casino", "lottery", "poker"]

# Descriptive statistics of the nine fertility intensities (per 1,000 women)
REFERENCE_VARIABLES = {
    "Gen": (54.0, 6.5),
    "MSnot": (19.0, 3.3),
    "MSyes": (35.0, 6.5),
    "Teen": (2.6, 0.8),
    "Old": (10.0, 2.0),
    "Ehigh": (17.0, 3.6),
    "Elow": (37.0, 6.6),
    "Poor": (14.0, 3.2),
    "Rich": (28.0, 5.0),
}
