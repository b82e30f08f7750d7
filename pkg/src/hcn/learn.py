"""Learning: iterated forward/backward passes, batch and online.

Batch learning runs the pass schedule over one shared graph until the
messages stop moving or the epoch budget runs out, then thresholds the weight
beliefs.  Online learning rebuilds a small graph per minibatch, visits every
per-image factor exactly once, and carries only the weight beliefs forward,
mixed with the initial prior by the forgetting factor.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .mp.messages import log_odds
from .model.arch import Architecture, Hyperparams
from .model.bconv import bconv_arrays
from .model.graph import HcnGraph, build_hcn_graph
from .model.tensors import BinaryTensor4, as_bits3, as_bits4

FIXED_POINT_TOL = 1e-6


class NonConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TrainedModel:
    """Binarized weights plus the structure they belong to.

    `weights` follows Architecture.layers (top to bottom).
    """

    arch: Architecture
    weights: tuple
    hyper: Hyperparams

    def weight_arrays_bottom_up(self):
        return [as_bits4(w) for w in reversed(self.weights)]


@dataclass
class LearnState:
    graph: HcnGraph
    epoch: int = 0
    deltas: list = field(default_factory=list)


def init_messages(arch, hyper, images, labels=None, masks=None, rng=None):
    """Build a learning graph with the standard message initialization:
    bottom-up and weight-bound messages at zero, top-down messages at -inf,
    weight priors drawn uniformly in (0.9 p_w, p_w), and the constant
    channel evidence attached to S^0."""
    graph = build_hcn_graph(arch, hyper, images, labels=labels, masks=masks, rng=rng)
    return LearnState(graph=graph)


def forward_pass(state):
    state.deltas.append(state.graph.forward_pass())
    return state


def backward_pass(state):
    delta = state.graph.backward_pass()
    if state.deltas:
        state.deltas[-1] = max(state.deltas[-1], delta)
    else:
        state.deltas.append(delta)
    state.epoch += 1
    return state


def binarize_weights(state_or_graph):
    """Threshold weight beliefs: positive -> 1, zero or negative -> 0."""
    graph = state_or_graph.graph if isinstance(state_or_graph, LearnState) else state_or_graph
    weights_bu = []
    for layer in range(1, graph.n_layers + 1):
        bits = (graph.w_beliefs(layer) > 0.0).astype(np.uint8)
        weights_bu.append(BinaryTensor4.from_array(bits))
    return TrainedModel(arch=graph.arch, weights=tuple(reversed(weights_bu)),
                        hyper=graph.hyper)


@dataclass
class BatchResult:
    model: TrainedModel
    graph: HcnGraph
    epochs_run: int
    final_delta: float
    converged: bool

    def s_beliefs(self, level=None):
        level = self.graph.n_layers if level is None else level
        return self.graph.s_beliefs(level)

    def r_beliefs(self, layer=1):
        return self.graph.r_beliefs(layer)


def learn_batch(images, labels, arch, hyper, masks=None):
    """Run the full pass schedule on one batch; returns the binarized model
    together with the final graph (per-image beliefs stay readable)."""
    if len(images) < 1:
        raise ValueError("need at least one image")
    graph = build_hcn_graph(arch, hyper, images, labels=labels, masks=masks)
    epochs_run, delta, converged = graph.run(hyper.epochs, tol=FIXED_POINT_TOL)
    if not converged and hyper.epochs > 0:
        warnings.warn(
            f"message passing stopped at the epoch limit ({hyper.epochs}) with "
            f"sup-norm change {delta:.3g}", NonConvergenceWarning)
    return BatchResult(model=binarize_weights(graph), graph=graph,
                       epochs_run=epochs_run, final_delta=delta, converged=converged)


@dataclass
class OnlineResult:
    model: TrainedModel
    last_graph: HcnGraph
    w_post: list
    epochs_run: int


def learn_online(images, labels, arch, hyper, batch_size):
    """Online learning with forgetting.

    Every sweep, each minibatch gets a fresh graph whose weight priors are
    the carried beliefs; each per-image factor is visited once (the tree
    visits interleave all the minibatch's images in one random order), then
    the per-image messages are dropped and only the weight beliefs persist:
    prior <- lam * posterior + (1 - lam) * initial prior.
    """
    if batch_size < 1:
        raise ValueError("minibatch size must be >= 1")
    n = len(images)
    if n < 1:
        raise ValueError("need at least one image")
    rng = np.random.default_rng(hyper.seed)
    resolved = arch.resolve()
    p_w_bu = hyper.p_w_for(arch)
    prior0 = []
    for li, res in enumerate(resolved):
        nw = int(np.prod(res.w_shape))
        q = rng.uniform(0.9 * p_w_bu[li], p_w_bu[li], nw)
        prior0.append(np.log(q) - np.log1p(-q))
    prior = [p.copy() for p in prior0]

    graph = None
    post = None
    for _ in range(max(hyper.epochs, 1)):
        for lo in range(0, n, batch_size):
            chunk = images[lo:lo + batch_size]
            chunk_labels = None if labels is None else labels[lo:lo + batch_size]
            graph = build_hcn_graph(arch, hyper, chunk, labels=chunk_labels,
                                    rng=rng, w_prior_beliefs=prior)
            graph.epoch()
            post = [graph.layers[li].w_fin.copy() for li in range(arch.n_layers)]
            prior = [hyper.lam * post[li] + (1.0 - hyper.lam) * prior0[li]
                     for li in range(arch.n_layers)]

    weights_bu = []
    for li, res in enumerate(resolved):
        bits = (post[li] > 0.0).astype(np.uint8).reshape(res.w_shape)
        weights_bu.append(BinaryTensor4.from_array(bits))
    model = TrainedModel(arch=arch, weights=tuple(reversed(weights_bu)), hyper=hyper)
    return OnlineResult(model=model, last_graph=graph, w_post=post,
                        epochs_run=max(hyper.epochs, 1))


def single_layer_log_prob(x, s_bits, w_bits, hyper):
    """Joint log probability of a single-layer assignment: Bernoulli priors
    on S and W plus the pixel channel against R = bconv(S, W)."""
    x = as_bits3(x).astype(bool)
    s = as_bits3(s_bits).astype(bool)
    w = as_bits4(w_bits)
    r = bconv_arrays(s.astype(np.uint8), w).astype(bool)
    lp = 0.0
    lp += s.sum() * np.log(hyper.p_s) + (s.size - s.sum()) * np.log(1 - hyper.p_s)
    p_w = hyper.p_w[0] if len(hyper.p_w) == 1 else hyper.p_w[-1]
    n_w_on = int(w.sum())
    lp += n_w_on * np.log(p_w) + (w.size - n_w_on) * np.log(1 - p_w)
    on = r
    lp += float(
        np.where(on, np.where(x, np.log(1 - hyper.p01), np.log(hyper.p01)),
                 np.where(x, np.log(hyper.p10), np.log(1 - hyper.p10))).sum())
    return lp
