"""Local-map estimators: fitting, cell lookup and prediction."""
from .base import (
    METHODS,
    GridModel,
    KNNModel,
    LocalModel,
    SplitSpec,
    TreeModel,
    VoronoiModel,
    cell_of,
    predict,
)
from .neighbors import choose_k, draw_prototypes, fit_knn, fit_optinet, fit_proto_nn, greedy_net, net_is_valid
from .serialize import dumps, loads, model_from_dict, model_to_dict
from .trees import (
    cart_cost,
    fit_cart_like,
    fit_centered_tree,
    fit_fixed_partition,
    fit_mondrian,
    fit_uniform_grid,
    fit_uniform_tree,
    uniform_cuts,
)

__all__ = [
    "METHODS", "GridModel", "KNNModel", "LocalModel", "SplitSpec", "TreeModel", "VoronoiModel",
    "cell_of", "predict", "choose_k", "draw_prototypes", "fit_knn", "fit_optinet", "fit_proto_nn",
    "greedy_net", "net_is_valid", "dumps", "loads", "model_from_dict", "model_to_dict", "cart_cost",
    "fit_cart_like", "fit_centered_tree", "fit_fixed_partition", "fit_mondrian", "fit_uniform_grid",
    "fit_uniform_tree", "uniform_cuts",
]
