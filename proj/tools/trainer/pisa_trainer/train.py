"""MNIST BWNN recipe: sign weights with a straight-through estimator, sign layer 1, quantized layer 2."""
import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from . import cli


class _BinW(torch.autograd.Function):
    @staticmethod
    def forward(ctx, w):
        return torch.where(w >= 0, 1.0, -1.0)

    @staticmethod
    def backward(ctx, g):
        return g


class _Sign(torch.autograd.Function):
    @staticmethod
    def forward(ctx, z):
        ctx.save_for_backward(z)
        return (z > 0).float()

    @staticmethod
    def backward(ctx, g):
        (z,) = ctx.saved_tensors
        return g * (z.abs() <= 1).float() * 0.5


class _Quant(torch.autograd.Function):
    @staticmethod
    def forward(ctx, y, top):
        ctx.save_for_backward(y)
        ctx.top = top
        return torch.clamp(torch.floor(y + 0.5), 0, top)

    @staticmethod
    def backward(ctx, g):
        (y,) = ctx.saved_tensors
        return g * ((y >= -0.5) & (y <= ctx.top + 0.5)).float(), None


class Net(nn.Module):
    def __init__(self, v, h, act_bits):
        super().__init__()
        self.top = 2**act_bits - 1
        self.w1 = nn.Parameter(torch.randn(v, 784) * 0.1)
        self.w2 = nn.Parameter(torch.randn(h, v) * 0.1)
        self.w3 = nn.Parameter(torch.randn(10, h) * 0.1)
        self.bn2 = nn.BatchNorm1d(h)
        self.bn3 = nn.BatchNorm1d(10)
        self.g2 = nn.Parameter(torch.ones(1) * 4.0)

    def forward(self, x):
        h1 = _Sign.apply(x @ _BinW.apply(self.w1).t() / 28.0)
        y2 = self.bn2(h1 @ _BinW.apply(self.w2).t()) * self.g2 + (self.top + 1) / 2
        q = _Quant.apply(y2, self.top)
        return self.bn3(q @ _BinW.apply(self.w3).t())


def _fold(bn, scale=1.0, bias=0.0):
    s = bn.weight / torch.sqrt(bn.running_var + bn.eps)
    b = bn.bias - bn.running_mean * s
    return (s * scale).numpy().astype(np.float32), (b * scale + bias).numpy().astype(np.float32)


def train_mnist(data_dir, epochs, seed, hidden, act_bits):
    torch.manual_seed(seed)
    load = lambda stem: cli.read_idx(cli.find_idx(data_dir, stem))
    # Inputs in the photodiode-voltage domain, normalized by the supply.
    tox = lambda x: torch.tensor(1.0 - x / 255.0, dtype=torch.float32)
    xtr, ytr = tox(load("train-images-idx3-ubyte")), torch.tensor(load("train-labels-idx1-ubyte"), dtype=torch.long)
    xte, yte = tox(load("t10k-images-idx3-ubyte")), torch.tensor(load("t10k-labels-idx1-ubyte"), dtype=torch.long)

    net = Net(hidden[0], hidden[1], act_bits)
    opt = torch.optim.Adam(net.parameters(), lr=3e-3)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, max(epochs, 1))
    acc = 0.0
    for ep in range(epochs):
        net.train()
        perm = torch.randperm(len(xtr))
        for i in range(0, len(xtr), 128):
            b = perm[i : i + 128]
            loss = F.cross_entropy(net(xtr[b]), ytr[b])
            opt.zero_grad()
            loss.backward()
            opt.step()
            with torch.no_grad():
                for w in (net.w1, net.w2, net.w3):
                    w.clamp_(-1, 1)
        sched.step()
        net.eval()
        with torch.no_grad():
            acc = (net(xte).argmax(1) == yte).float().mean().item()
        print("epoch %d loss %.4f val %.4f" % (ep, loss.item(), acc), flush=True)

    with torch.no_grad():
        s2, b2 = _fold(net.bn2, net.g2.item(), (net.top + 1) / 2)
        s3, b3 = _fold(net.bn3)
        return dict(w1=net.w1.numpy(), w2=net.w2.numpy(), w3=net.w3.numpy(), s2=s2, b2=b2, s3=s3, b3=b3,
                    act_bits=act_bits, val_accuracy=acc)
