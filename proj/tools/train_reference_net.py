#!/usr/bin/env python3
"""Train the 28x28-6c5-2s-12c5-2s-10o sigmoid network and export it as weight JSON.

Activations are sigmoids so that a trained unit maps onto one stochastic neuron, and
weights are clipped to +/-3 so every crossbar drive stays within +/-3 i_o per synapse.
Inputs are sometimes replaced by short Bernoulli rate estimates and pre-activations
carry Gaussian noise, which keeps the network accurate when it is run with spikes.

    python3 tools/train_reference_net.py --train-images train-images.idx3-ubyte \
        --train-labels train-labels.idx1-ubyte --out data/lenet_sigmoid.json
"""
import argparse
import json
import struct

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

W_MAX = 3.0


def read_idx(path, magic):
    with open(path, "rb") as f:
        head = struct.unpack(">II", f.read(8))
        if head[0] != magic:
            raise SystemExit(f"{path}: bad magic {head[0]}")
        if magic == 2051:
            rows, cols = struct.unpack(">II", f.read(8))
            return np.frombuffer(f.read(), dtype=np.uint8).reshape(head[1], rows * cols)
        return np.frombuffer(f.read(), dtype=np.uint8)


class Net(nn.Module):
    def __init__(self):
        super().__init__()
        self.c1 = nn.Conv2d(1, 6, 5)
        self.c2 = nn.Conv2d(6, 12, 5)
        self.fc = nn.Linear(12 * 4 * 4, 10)

    def forward(self, x, noise=0.0, spikes=False):
        def act(z):
            if noise > 0:
                z = z + noise * torch.randn_like(z)
            p = torch.sigmoid(z)
            if spikes:
                # one Bernoulli draw per unit, straight-through gradient
                p = p + (torch.bernoulli(p) - p).detach()
            return p

        x = F.avg_pool2d(act(self.c1(x)), 2)
        x = F.avg_pool2d(act(self.c2(x)), 2)
        return self.fc(x.flatten(1))

    def clip(self):
        with torch.no_grad():
            for p in self.parameters():
                p.clamp_(-W_MAX, W_MAX)


def export(net, path):
    def flat(t):
        return [round(float(v), 7) for v in t.detach().reshape(-1)]

    doc = {
        "input": [1, 28, 28],
        "scale": 1.0,
        "layers": [
            {"type": "conv", "kernel": [6, 1, 5, 5], "weights": flat(net.c1.weight), "bias": flat(net.c1.bias)},
            {"type": "subsample", "kernel": [2, 2]},
            {"type": "conv", "kernel": [12, 6, 5, 5], "weights": flat(net.c2.weight), "bias": flat(net.c2.bias)},
            {"type": "subsample", "kernel": [2, 2]},
            {"type": "full", "kernel": [10, 192], "weights": flat(net.fc.weight), "bias": flat(net.fc.bias)},
        ],
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--train-images", required=True)
    ap.add_argument("--train-labels", required=True)
    ap.add_argument("--test-images")
    ap.add_argument("--test-labels")
    ap.add_argument("--out", required=True)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--noise", type=float, default=0.1)
    ap.add_argument("--lr", type=float, default=1e-2)
    ap.add_argument("--spike-batches", type=float, default=0.0,
                    help="fraction of batches run with single-draw spikes in every layer")
    ap.add_argument("--loss", choices=["ce", "bce"], default="ce",
                    help="bce trains each output unit as its own sigmoid spike probability")
    args = ap.parse_args()

    torch.manual_seed(args.seed)
    torch.set_num_threads(1)
    x = torch.tensor(read_idx(args.train_images, 2051), dtype=torch.float32).reshape(-1, 1, 28, 28) / 255.0
    y = torch.tensor(read_idx(args.train_labels, 2049), dtype=torch.long)

    net = Net()
    opt = torch.optim.Adam(net.parameters(), lr=args.lr)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, args.epochs)
    for epoch in range(args.epochs):
        net.train()
        perm = torch.randperm(len(y))
        total = 0.0
        for i in range(0, len(y), 64):
            idx = perm[i : i + 64]
            xb = x[idx]
            spikes = bool(torch.rand(()) < args.spike_batches)
            if spikes:
                xb = torch.bernoulli(xb)
            elif torch.rand(()) < 0.5:
                xb = torch.bernoulli(xb.unsqueeze(0).expand(8, *xb.shape)).mean(0)
            logits = net(xb, noise=args.noise, spikes=spikes)
            if args.loss == "bce":
                loss = F.binary_cross_entropy_with_logits(logits, F.one_hot(y[idx], 10).float())
            else:
                loss = F.cross_entropy(logits, y[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
            net.clip()
            total += loss.item() * len(idx)
        sched.step()
        print(f"epoch {epoch + 1}: loss {total / len(y):.4f}")

    if args.test_images:
        xt = torch.tensor(read_idx(args.test_images, 2051), dtype=torch.float32).reshape(-1, 1, 28, 28) / 255.0
        yt = torch.tensor(read_idx(args.test_labels, 2049), dtype=torch.long)
        with torch.no_grad():
            acc = (net(xt).argmax(1) == yt).float().mean().item()
        print(f"test accuracy {acc:.4f}")
    export(net, args.out)


if __name__ == "__main__":
    main()
