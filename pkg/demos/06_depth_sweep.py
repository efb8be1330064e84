#!/usr/bin/env python3
"""Sensitivity to the number of variational blocks (repetition count R).

Trains v*R + u on MNIST-4 for R = 1..4 with identical settings and
prints the accuracy trend: more blocks mean more real-valued weights.
"""

from qnnkit.arch import vu_architecture
from qnnkit.data import mnist_task
from qnnkit.model import TrainConfig, accuracy, init_parameters, train

tr, te = mnist_task([0, 3, 6, 9], 8)
config = TrainConfig(seed=0)

print(f"v*R + u on MNIST-4 ({len(tr)} train / {len(te)} test), shared settings")
for r in range(1, 5):
    arch = vu_architecture(64, 4, r1=r)
    params, _ = train(arch, init_parameters(arch, 0), tr.images, tr.labels,
                      config, te.images, te.labels)
    print(f"  R={r}: test accuracy {accuracy(arch, params, te.images, te.labels):.4f}")
