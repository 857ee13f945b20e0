"""gdtree: hard axis-aligned decision trees trained with gradient descent.

All split indices, thresholds and leaf distributions of a balanced tree are
optimized jointly by backpropagation with straight-through operators over a
dense matrix representation; hardened trees are plain, prunable decision
trees.  Ships with preprocessing, a greedy CART baseline, evaluation metrics
and a small benchmark harness.
"""

from .backend import active_backend
from .bench import BenchmarkReport, TrialResult, run_benchmark
from .cart import CartConfig, best_split, build, impurity
from .data import (
    Dataset,
    PreprocessModel,
    leave_one_out_encode,
    load_csv,
    load_csv_features,
    normal_quantile,
    quantile_normal_apply,
    quantile_normal_fit,
    should_rebalance,
    smote_rebalance,
    split_dataset,
)
from .grad import backward_from_cache, forward_cached, loss_and_gradients
from .losses import (
    LossConfig,
    batch_loss,
    cross_entropy,
    focal_cross_entropy,
    per_sample_loss,
    poly_adjust,
)
from .metrics import accuracy, competition_ranks, macro_f1, mean_reciprocal_rank
from .model_io import ModelBundle, load_model, save_model
from .ops import (
    ForwardMode,
    GradTriple,
    entmax15,
    entmax15_vjp,
    hardmax_st,
    round_st,
    sigmoid,
    sigmoid_grad,
    softmax,
)
from .training import (
    AdamState,
    FitReport,
    TrainConfig,
    TrainingDivergedError,
    adam_step,
    init_params,
    swa_average,
    train,
)
from .tree import (
    DenseTreeParams,
    LeafRouting,
    TreeLeaf,
    TreeNode,
    VanillaTree,
    count_nodes,
    leaf_indicator,
    node_index,
    path_bit,
    prune_zero_branches,
    routing_tables,
    split_hard,
    split_soft,
    to_vanilla,
    tree_pass,
)

__version__ = "0.1.0"
