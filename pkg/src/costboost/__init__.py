"""Cost-sensitive ensemble classifiers for imbalanced ordinal survey data."""

from costboost.bagging import (
    BaggedEnsemble,
    ImportanceReport,
    OobCurve,
    fit_bagged,
    oob_error_curve,
    permutation_importance,
    predict_bagged,
    select_features,
)
from costboost.boosting import (
    BoostedEnsemble,
    CostMatrix,
    EarlyStopSpec,
    alpha,
    early_stop_check,
    fit_adaboost_m1,
    fit_gentleboost,
    init_weights,
    predict_boosted,
    round_error,
)
from costboost.dataset import (
    BinaryDataset,
    ImbalanceProfile,
    SplitPlan,
    SurveyTable,
    binarize,
    imbalance_profile,
    load_dataset,
    load_survey_csv,
    read_dataset,
    stratified_kfold,
    synth_survey,
    write_dataset,
    write_survey_csv,
)
from costboost.modelio import load_model, save_model
from costboost.evaluation import (
    ConfusionMatrix,
    CvReport,
    LearnerSpec,
    Metrics,
    compare_algorithms,
    confusion,
    cost_sweep,
    crossval,
    metrics,
)
from costboost.svm import SvmModel, fit_linear_svm, predict_svm
from costboost.tree import (
    Tree,
    TreeParams,
    fit_classification_tree,
    fit_regression_tree,
    predict_tree,
)

__version__ = "0.1.0"
