"""Default hyperparameter grids and reference numbers."""

LEARNING_RATES = [1e-4, 5e-4, 1e-3, 1e-2]
# 'all' stands for every upper-triangle feature, n(n-1)/2
FEATURE_COUNTS = [100, 200, 500, 1000, 5000, 10000, 'all']
P_THRESHOLDS = [0.001, 0.01, 0.05, 0.1, 0.5, 1.0]
SWEEP_DENSITIES = [0, 5, 20, 50, 100]

DEFAULT_GRIDS = {
    'logistic': {'C': [0.1, 1.0, 10.0], 'solver': ['liblinear', 'lbfgs', 'saga'], 'm': FEATURE_COUNTS},
    'linear': {'m': FEATURE_COUNTS},
    'elasticnet': {'alpha': [0.001, 0.01, 0.1, 0.5, 1.0], 'l1_ratio': [0.2, 0.5, 0.7], 'm': FEATURE_COUNTS},
    'svm': {'kernel': ['linear', 'rbf'], 'm': FEATURE_COUNTS},
    'svr': {'kernel': ['linear', 'rbf'], 'm': FEATURE_COUNTS},
    'random_forest': {'n_estimators': [100, 200], 'max_depth': [10, None], 'm': FEATURE_COUNTS},
    'naive_bayes': {'m': FEATURE_COUNTS},
    'kernel_ridge': {'alpha': [0.1, 1.0, 10.0], 'kernel': ['linear', 'rbf', 'poly'], 'm': FEATURE_COUNTS},
    'mlp_flatten': {'learning_rate': LEARNING_RATES},
    'mlp_node': {'learning_rate': LEARNING_RATES},
    'cpm': {'p_threshold': P_THRESHOLDS},
    'gcn': {'n_layers': [2, 3], 'hidden_dim': [32, 128, 256], 'readout': ['concat', 'mean'],
            'learning_rate': LEARNING_RATES},
    'gat': {'n_layers': [2, 3], 'hidden_dim': [32, 128, 256], 'heads': [2, 4], 'learning_rate': LEARNING_RATES},
    'gin': {'n_layers': [2, 3], 'hidden_dim': [32, 128, 256], 'epsilon': [0.0, 0.2, 0.5],
            'learning_rate': LEARNING_RATES},
    'sage': {'n_layers': [2, 3], 'hidden_dim': [32, 128, 256], 'aggregator': ['mean', 'max'],
             'learning_rate': LEARNING_RATES},
    'signed': {'readout': ['concat', 'mean'], 'hidden_dim': [64, 128, 256], 'learning_rate': LEARNING_RATES},
    'residual': {'n_layers': [2, 3], 'hidden_dim': [32, 64, 128], 'learning_rate': LEARNING_RATES},
    'dual': {'phase1_epochs': [10, 20, 50], 'n_layers': [2, 3, 4], 'hidden_dim': [32, 64, 128],
             'learning_rate': LEARNING_RATES},
}

# Published dual-pathway vs. best-baseline test means. Documentation only:
# the cohorts are access-restricted and nothing here is checked against.
PUBLISHED_RESULTS = {
    'ABIDE': {'metric': 'auroc', 'dual': 0.732, 'best_baseline': 0.737},
    'PNC': {'metric': 'auroc', 'dual': 0.834, 'best_baseline': 0.827},
    'HCP': {'metric': 'pearson_r', 'dual': 0.247, 'best_baseline': 0.270},
    'ABCD': {'metric': 'pearson_r', 'dual': 0.358, 'best_baseline': 0.348},
}
