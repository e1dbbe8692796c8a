from brainbench.baselines.cpm import CPMMode, cpm_fit_predict, cpm_select
from brainbench.baselines.estimators import (
    CLASSIFICATION_KINDS,
    KINDS,
    REGRESSION_KINDS,
    EstimatorSpec,
    FittedEstimator,
    fit_estimator,
    predict,
)
from brainbench.baselines.mlp import MLPFlatten, MLPNode, build_mlp, mlp_forward
from brainbench.baselines.selection import (
    FeatureSelection,
    feature_correlations,
    feature_pvalues,
    select_top_m,
)
