"""Command line: train, export, vectors."""
import argparse
import gzip
import json
import os
import struct
import sys

import numpy as np

from . import reference, weightfile


class DatasetMissing(FileNotFoundError):
    pass


def read_idx(path):
    if not os.path.exists(path):
        raise DatasetMissing(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rb") as f:
        b = f.read()
    (n,) = struct.unpack(">I", b[4:8])
    if b[3] == 3:
        return np.frombuffer(b, np.uint8, offset=16).reshape(n, -1)
    return np.frombuffer(b, np.uint8, offset=8)


def find_idx(data_dir, stem):
    for name in (stem, stem + ".gz"):
        p = os.path.join(data_dir, name)
        if os.path.exists(p):
            return p
    raise DatasetMissing(os.path.join(data_dir, stem))


def cmd_train(args):
    from .train import train_mnist  # torch is only needed here

    ckpt = train_mnist(args.data, args.epochs, args.seed, args.hidden, args.act_bits)
    np.savez(args.out, **ckpt)
    print("validation accuracy %.4f" % float(ckpt["val_accuracy"]))


def checkpoint_layers(path):
    d = np.load(path)
    if "w1" not in d:
        raise weightfile.FormatError("empty checkpoint")
    w1, w2, w3 = d["w1"], d["w2"], d["w3"]
    qb = int(d["act_bits"])
    fc = lambda w, ib, s, b: weightfile.LayerSpec(
        1, w.shape[1], w.shape[0], input_bits=ib, codes=weightfile.binarize(w), bn_scale=s, bn_bias=b)
    return [
        fc(w1, 8, np.ones(w1.shape[0]), np.zeros(w1.shape[0])),
        fc(w2, 1, d["s2"], d["b2"]),
        fc(w3, qb, d["s3"], d["b3"]),
    ]


def cmd_export(args):
    weightfile.save(args.out, checkpoint_layers(args.checkpoint))


def cmd_vectors(args):
    layers = weightfile.load(args.weights)
    images = read_idx(find_idx(args.data, "t10k-images-idx3-ubyte"))[: args.frames].astype(np.float64)
    frames = []
    for i, x in enumerate(images):
        h1 = reference.coarse_layer1(layers[0], x)
        acts, logits = reference.backend(layers, h1)
        hf = reference.fine_layer1(layers[0], x)
        _, logits_f = reference.backend(layers, hf)
        frames.append(dict(index=i, layer1_bits="".join(map(str, h1)), layer2_codes=acts[0].tolist(),
                           logits=logits.tolist(), predicted=int(np.argmax(logits)),
                           fine_layer1_bits="".join(map(str, hf)), fine_predicted=int(np.argmax(logits_f))))
    with open(args.out, "w") as f:
        json.dump(dict(weights=os.path.basename(args.weights), frames=frames), f)


def main(argv=None):
    p = argparse.ArgumentParser(prog="pisa-trainer")
    sub = p.add_subparsers(dest="cmd", required=True)
    t = sub.add_parser("train", help="train the MNIST BWNN recipe")
    t.add_argument("--data", required=True, help="directory holding the MNIST idx files")
    t.add_argument("--epochs", type=int, default=10)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--hidden", type=int, nargs=2, default=[256, 256])
    t.add_argument("--act-bits", type=int, default=4)
    t.add_argument("--out", required=True, help="checkpoint .npz")
    t.set_defaults(fn=cmd_train)
    e = sub.add_parser("export", help="checkpoint to PISAW1")
    e.add_argument("checkpoint")
    e.add_argument("--out", required=True)
    e.set_defaults(fn=cmd_export)
    v = sub.add_parser("vectors", help="golden vectors for a weight file")
    v.add_argument("weights")
    v.add_argument("--data", required=True)
    v.add_argument("--frames", type=int, default=32)
    v.add_argument("--out", required=True)
    v.set_defaults(fn=cmd_vectors)
    args = p.parse_args(argv)
    try:
        args.fn(args)
    except (DatasetMissing, weightfile.FormatError) as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
