"""Integer-domain reference forward pass for fully connected PISAW1 networks."""
import numpy as np

V_DD = 1.2


def levels(layer):
    top = (1 << layer.weight_bits) - 1
    return (2 * layer.codes.reshape(layer.out_ch, -1) - top).astype(np.int64)


def coarse_layer1(layer, pixels):
    vpd = np.clip(V_DD - V_DD * (pixels / 255.0), 0.0, V_DD)
    w = layer.codes.reshape(layer.out_ch, -1) > 0
    # Sequential sums in pixel order, as the sensor accumulates them.
    pos = np.cumsum(np.where(w, vpd[None, :], 0.0), axis=1)[:, -1]
    neg = np.cumsum(np.where(w, 0.0, vpd[None, :]), axis=1)[:, -1]
    return (pos - neg > 0).astype(np.int64)


def fine_layer1(layer, pixels):
    vpd = np.clip(V_DD - V_DD * (pixels / 255.0), 0.0, V_DD)
    code = np.clip(np.floor((V_DD - vpd) / V_DD * 255 + 0.5), 0, 255).astype(np.int64)
    return ((levels(layer) @ (255 - code)) > 0).astype(np.int64)


def backend(layers, h):
    """Runs layers[1:] on layer-1 bits; returns per-layer activations and logits."""
    acts = []
    for i, l in enumerate(layers[1:], start=1):
        y = l.bn_scale.astype(np.float64) * (levels(l) @ h) + l.bn_bias.astype(np.float64)
        if i + 1 == len(layers):
            return acts, y
        nxt = layers[i + 1].input_bits
        h = (y > 0).astype(np.int64) if nxt == 1 else np.clip(np.floor(y + 0.5), 0, (1 << nxt) - 1).astype(np.int64)
        acts.append(h)
    raise ValueError("network needs at least two layers")
