"""Network architecture and scalar hyperparameters, with the shape algebra
that ties layers together.

Layer convention: ``Architecture.layers`` lists layer specs from the top of
the hierarchy down to the image, mirroring how the generative story is told.
The engine resolves them bottom-up: layer 1 sits right above the image, layer
L is the top.  Within layer l, the sparsification S^l is combined with the
weights W^l into the representation R^l (binary convolution), and the pooling
stage jitters R^l into S^{l-1}.  S^0 meets the image through the noisy
channel.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class LayerSpec:
    num_features: int
    feat_h: int
    feat_w: int
    pool_h: int = 1
    pool_w: int = 1

    def __post_init__(self):
        for name in ("num_features", "feat_h", "feat_w", "pool_h", "pool_w"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.pool_h % 2 == 0 or self.pool_w % 2 == 0:
            raise ValueError("pool dims must be odd (centered window)")


@dataclass(frozen=True)
class ResolvedLayer:
    """Concrete shapes for one layer (bottom-up index)."""

    spec: LayerSpec
    s_shape: tuple  # (F^l, H_S, W_S) sparsification above the convolution
    r_shape: tuple  # (F^{l-1}, H_R, W_R) representation below it
    w_shape: tuple  # (F^{l-1}, F^l, feat_h, feat_w)


@dataclass(frozen=True)
class Architecture:
    """Model structure: class layer on top (optional), then paired
    convolution/pooling layers, down to the image.

    num_classes == 0 drops the class layer; the top sparsification then takes
    the independent Bernoulli(p_S) prior of the standalone single-layer model.
    With classes, the top sparsification must come out 1x1 spatially with
    J*K channels (one per template).
    """

    image_shape: tuple  # (F_X, H_X, W_X)
    layers: tuple  # LayerSpec, top to bottom
    num_classes: int = 0
    templates_per_class: int = 1

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "image_shape", tuple(int(d) for d in self.image_shape))
        if len(self.image_shape) != 3 or any(d < 1 for d in self.image_shape):
            raise ValueError(f"bad image shape {self.image_shape}")
        if not self.layers:
            raise ValueError("need at least one layer")
        if self.num_classes < 0 or self.templates_per_class < 1:
            raise ValueError("bad class layer sizes")
        self.resolve()  # validates shape chain

    @property
    def n_layers(self):
        return len(self.layers)

    @property
    def n_templates(self):
        return self.num_classes * self.templates_per_class

    def resolve(self):
        """Bottom-up list of ResolvedLayer; raises on inconsistent shapes."""
        resolved = []
        below = self.image_shape  # shape of S^{l-1}
        for spec in reversed(self.layers):  # bottom-up
            f_below, h_r, w_r = below
            h_s = h_r - spec.feat_h + 1
            w_s = w_r - spec.feat_w + 1
            if h_s < 1 or w_s < 1:
                raise ValueError(
                    f"feature {spec.feat_h}x{spec.feat_w} larger than its input {h_r}x{w_r}"
                )
            s_shape = (spec.num_features, h_s, w_s)
            resolved.append(ResolvedLayer(
                spec=spec,
                s_shape=s_shape,
                r_shape=below,
                w_shape=(f_below, spec.num_features, spec.feat_h, spec.feat_w),
            ))
            below = s_shape
        if self.num_classes > 0:
            top = resolved[-1].s_shape
            if top != (self.n_templates, 1, 1):
                raise ValueError(
                    f"class layer needs a {self.n_templates}x1x1 top sparsification, got {top}"
                )
        return resolved


@dataclass(frozen=True)
class Hyperparams:
    """Scalar knobs of the generative model and of message passing.

    p_w follows the layer order of Architecture.layers (top to bottom); a
    single float applies to every layer.
    """

    p01: float = 0.03          # P(pixel off | source on)
    p10: float = 0.03          # P(pixel on | source off)
    p_s: float = 0.01          # sparsification prior (classless top layer)
    p_w: tuple = (0.1,)        # weight prior per layer, top to bottom
    alpha: float = 0.8         # damping for pool-to-representation updates
    lam: float = 1.0           # online forgetting factor
    epochs: int = 100
    seed: int = 0
    pool_perturb: float = 1e-3  # pool tie-break noise amplitude (0 disables)

    def __post_init__(self):
        p_w = self.p_w
        if isinstance(p_w, (int, float)):
            p_w = (float(p_w),)
        object.__setattr__(self, "p_w", tuple(float(p) for p in p_w))
        for name in ("p01", "p10"):
            v = getattr(self, name)
            if not 0.0 < v < 0.5:
                raise ValueError(f"{name} must be in (0, 0.5), got {v}")
        if not 0.0 < self.p_s < 1.0:
            raise ValueError(f"p_s must be in (0, 1), got {self.p_s}")
        for p in self.p_w:
            if not 0.0 < p < 1.0:
                raise ValueError(f"p_w entries must be in (0, 1), got {p}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"lambda must be in (0, 1], got {self.lam}")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.pool_perturb < 0:
            raise ValueError("pool_perturb must be >= 0")

    def p_w_for(self, arch):
        """Per-layer weight priors in bottom-up order, expanded if scalar."""
        if len(self.p_w) == 1:
            return [self.p_w[0]] * arch.n_layers
        if len(self.p_w) != arch.n_layers:
            raise ValueError(
                f"p_w has {len(self.p_w)} entries for {arch.n_layers} layers"
            )
        return list(reversed(self.p_w))
