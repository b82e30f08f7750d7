"""Test-time tasks against frozen binary weights.

Freezing rewires each convolution factor: weight 1 turns its AND into a wire,
weight 0 removes the child, leaving plain ORs between representation and
sparsification.  Classification is one forward pass; it has the same
functional form as linear convolutions plus max-pooling, and both routes are
implemented here independently so they can be checked against each other.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .model.bconv import bconv_arrays
from .model.graph import HcnGraph, channel_unaries
from .model.tensors import BinaryTensor3, as_bits3, as_bits4


@dataclass(frozen=True)
class ClassScores:
    scores: np.ndarray            # (K,) best template belief per class
    class_id: int
    template_id: int              # template index within the winning class
    template_scores: np.ndarray   # (K, J)


def _scores_from_templates(template_beliefs):
    out = []
    for tb in template_beliefs:
        scores = tb.max(axis=1)
        k = int(np.argmax(scores))
        j = int(np.argmax(tb[k]))
        out.append(ClassScores(scores=scores, class_id=k, template_id=j,
                               template_scores=tb))
    return out


def _frozen_graph(images, model, p01=None, p10=None, masks=None, labels=None,
                  pool_perturb=0.0):
    hyper = model.hyper
    if p01 is not None or p10 is not None:
        hyper = dataclasses.replace(
            hyper,
            p01=p01 if p01 is not None else hyper.p01,
            p10=p10 if p10 is not None else hyper.p10)
    return HcnGraph(model.arch, hyper, images, labels=labels, masks=masks,
                    frozen_weights=model.weights, pool_perturb=pool_perturb)


def classify_forward(images, model, p01=None, p10=None):
    """One message-passing forward pass; returns a ClassScores per image.

    The channel constants may be overridden: the winning class must not
    depend on them, only on which template collects the most evidence.
    """
    graph = _frozen_graph(images, model, p01, p10)
    graph.forward_pass()
    return _scores_from_templates(graph.template_beliefs())


def _maxpool_stage(v, pool_h, pool_w):
    """v[f, r, c] -> max over the centered window of shifted values minus the
    log of the surviving window size (borders shrink)."""
    f, h, w = v.shape
    out = np.full((f, h, w), -np.inf)
    arity = np.zeros((h, w))
    for dr in range(-(pool_h // 2), pool_h // 2 + 1):
        for dc in range(-(pool_w // 2), pool_w // 2 + 1):
            r0, r1 = max(-dr, 0), min(h - dr, h)
            c0, c1 = max(-dc, 0), min(w - dc, w)
            out[:, r0:r1, c0:c1] = np.maximum(
                out[:, r0:r1, c0:c1], v[:, r0 + dr:r1 + dr, c0 + dc:c1 + dc])
            arity[r0:r1, c0:c1] += 1
    return out - np.log(arity)


def _correlate_binary(v, w_bits):
    """out[f, r, c] = sum of v[a, r+dr, c+dc] over the ones of w[a, f]."""
    a_n, f_n, fh, fw = w_bits.shape
    _, h, w = v.shape
    hs, ws = h - fh + 1, w - fw + 1
    out = np.zeros((f_n, hs, ws))
    for a, f, dr, dc in np.argwhere(w_bits > 0):
        out[f] += v[a, dr:dr + hs, dc:dc + ws]
    return out


def classify_direct(images, model, p01=None, p10=None):
    """Classification by plain array arithmetic: alternating linear
    correlations with the binary weights and max-pooling, topped by a max
    over each class's templates.  Must agree with classify_forward on the
    argmax."""
    hyper = model.hyper
    p01 = hyper.p01 if p01 is None else p01
    p10 = hyper.p10 if p10 is None else p10
    arch = model.arch
    weights_bu = model.weight_arrays_bottom_up()
    specs_bu = list(reversed(arch.layers))
    out = []
    for x in images:
        v = channel_unaries(as_bits3(x), p01, p10)
        for spec, w_bits in zip(specs_bu, weights_bu):
            v = _maxpool_stage(v, spec.pool_h, spec.pool_w)
            v = _correlate_binary(v, w_bits)
        tb = v.reshape(arch.num_classes, arch.templates_per_class)
        out.append(tb)
    return _scores_from_templates(out)


def inpaint(x, mask, model, label=None, alternations=10):
    """Fill unobserved pixels (mask 0) by decoding S^0 after one forward pass
    and one backward pass whose pool stage alternates with the bottom-up
    refresh `alternations` times.  Observed pixels pass through untouched."""
    x_bits = as_bits3(x)
    mask_bits = as_bits3(mask)
    if mask_bits.shape != x_bits.shape:
        raise ValueError("mask shape must match the image")
    wrapped = isinstance(x, BinaryTensor3)
    graph = _frozen_graph([x_bits], model, masks=[mask_bits],
                          labels=None if label is None else [label],
                          pool_perturb=model.hyper.pool_perturb)
    graph.forward_pass()
    graph.backward_pass(pool_iters=max(1, alternations))
    decoded = (graph.s_beliefs(0)[0] > 0.0).astype(np.uint8)
    out = np.where(mask_bits > 0, x_bits, decoded)
    return BinaryTensor3.from_array(out) if wrapped else out


def reconstruct(s_beliefs, weights):
    """Threshold sparsification beliefs at 0 (log-odds space) and render
    them through the binary convolution."""
    s_bits = (np.asarray(s_beliefs, dtype=np.float64) > 0.0).astype(np.uint8)
    w = as_bits4(weights)
    if w.dtype != np.uint8 or not np.isin(w, (0, 1)).all():
        w = (w > 0).astype(np.uint8)
    return bconv_arrays(s_bits, w)


def extract_sparsification(graph, level=None):
    """Thresholded S beliefs at a level plus per-feature usage counts."""
    level = graph.n_layers if level is None else level
    s_bits = (graph.s_beliefs(level) > 0.0).astype(np.uint8)
    usage = s_bits.sum(axis=(0, 2, 3)) if s_bits.ndim == 4 else s_bits.sum(axis=(1, 2))
    return s_bits, usage
