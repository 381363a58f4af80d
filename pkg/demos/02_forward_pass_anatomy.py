"""Dissecting one forward pass, stage by stage.

A trained correlation network is a stack of matched filters whose templates
were learned rather than designed.  This demo builds a tiny network with
hand-picked weights, pushes one signal through it, and prints every
intermediate the forward pass records on its tape:

    correlation -> bias -> rectifier -> max pool -> flatten -> dense -> softmax

The tape is the same object the backward pass consumes, so everything shown
here — especially the rectifier and pool indicator masks — is exactly what
gradient propagation will later route through.

Run:  python3 demos/02_forward_pass_anatomy.py
"""

import numpy as np

from sigcnn import (
    ConvBlock,
    ConvLayer,
    DenseBlock,
    DenseLayer,
    Network,
    forward,
)


def show(label: str, arr) -> None:
    print(f"  {label:<22} {np.round(np.asarray(arr), 4).tolist()}")


def main() -> None:
    # Two correlation kernels: one tuned to an up-down-up edge, one to a
    # plateau.  Pool width 2 keeps the strongest response of each pair.
    conv = ConvLayer(
        weights=np.array([
            [[-0.5, 1.0, -0.5]],  # channel 0: peak detector
            [[0.4, 0.4, 0.4]],  # channel 1: plateau detector
        ]),
        bias=np.array([0.1, -0.2]),
    )
    dense_hidden = DenseLayer(
        weights=np.array([
            [0.6, -0.3, 0.2, 0.1, -0.4, 0.5],
            [-0.2, 0.7, -0.1, 0.3, 0.2, -0.6],
            [0.1, 0.1, 0.5, -0.5, 0.3, 0.2],
        ]),
        bias=np.array([0.05, -0.05, 0.0]),
    )
    dense_out = DenseLayer(weights=np.array([[0.9, -0.4, 0.3], [-0.7, 0.8, -0.2]]))
    net = Network(
        input_len=8,
        conv_blocks=[ConvBlock(conv, pool_width=2)],
        dense_blocks=[DenseBlock(dense_hidden, relu=True), DenseBlock(dense_out)],
        loss_kind="cross_entropy",
    )

    print("Stage plan (computed at construction, before any data is seen):")
    for stage in net.shape_walk():
        print(f"  {stage['stage']:<8} shape {stage['shape']}")
    print(f"  total learnable parameters: {net.param_count()}")

    x = np.array([0.0, -0.5, 1.0, -0.5, 0.0, 0.8, 0.8, 0.8])
    print()
    print(f"input signal: {x.tolist()}")
    output, tape = forward(net, x)

    print()
    print("conv block 0")
    trace = tape.conv[0]
    for ch in range(2):
        print(f" channel {ch}:")
        show("pre-activation", trace.pre_act[ch])
        show("rectifier mask", trace.relu_mask[ch].astype(int))
        show("rectified", trace.activated[ch])
        show("pool keep-mask", trace.pool_mask[ch].astype(int))
        show("pooled", trace.pooled[ch])
    # The rectifier mask marks where the pre-activation was positive; the
    # pool mask marks, inside each pool window, which sample won the max.
    # Backpropagation multiplies by the first and routes through the second.

    print()
    print("flatten (channel 0 row, then channel 1 row)")
    show("flat vector", tape.flat)
    assert np.array_equal(tape.flat, trace.pooled.reshape(-1))

    print()
    print("dense block 0 (rectified)")
    show("pre-activation", tape.dense[0].pre_act)
    show("rectifier mask", tape.dense[0].relu_mask.astype(int))
    show("output", tape.dense[0].output)

    print()
    print("dense block 1 (scores, no rectifier)")
    show("scores", tape.dense[1].pre_act)

    print()
    print("softmax")
    show("probabilities", output)
    print(f"  probabilities sum to {float(np.sum(output)):.15f}")
    winner = int(np.argmax(output))
    print(f"  predicted class: {winner} with P = {output[winner]:.4f}")

    # The same pass, re-run, reproduces the tape bit for bit: inference
    # consumes no randomness.
    output2, tape2 = forward(net, x)
    assert np.array_equal(output, output2)
    assert np.array_equal(tape.flat, tape2.flat)
    print()
    print("Re-running the pass reproduced every value bit-for-bit.")


if __name__ == "__main__":
    main()
