from brainbench.data_io.dataset import ConnectomeArrays, Dataset, Splits, Subject, Task, zscore_rows
from brainbench.data_io.loader import load_dataset, truncate_dataset, truncate_series, write_dataset
from brainbench.data_io.split import SplitSpec, make_split, split_indices
from brainbench.data_io.synthetic import DEFAULT_EFFECT_SIZE, SyntheticConfig, generate_synthetic
