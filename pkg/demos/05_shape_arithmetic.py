"""Window arithmetic, stack walkthroughs, and parameter budgets.

Every sliding-window stage obeys one closed-form size rule:

    out = floor((n + 2*pad - width) / stride) + 1

and a pool declared without a stride covers the input in ceil(n / width)
non-overlapping blocks.  Those two rules are enough to walk an entire
published convolutional stack on paper, checking each layer's declared
output against the formula — which is exactly what this demo does, flagging
the one declared size the arithmetic cannot produce.  It closes with the
parameter-budget comparison between a direct tapped correlation bank and
its factored (per-tap then per-channel) equivalent.

Run:  python3 demos/05_shape_arithmetic.py
"""

from sigcnn import (
    alexnet_walkthrough,
    block_pool_len,
    param_budget,
    walk_layer_table,
    window_out_len,
)


def main() -> None:
    print("the window formula, out = floor((n + 2p - w) / s) + 1")
    for n, w, s, p in ((224, 11, 4, 2), (55, 3, 2, 0), (27, 5, 1, 2), (13, 3, 1, 1)):
        print(f"  n={n:<4} width={w:<3} stride={s} pad={p}  ->  {window_out_len(n, w, s, p)}")
    print(f"unstrided block pool: ceil(7 / 2) = {block_pool_len(7, 2)} blocks")

    print()
    print("walking the classic 224x224x3 image stack against its declared sizes")
    rows = alexnet_walkthrough()
    total = 0
    for row in rows:
        note = ""
        if row.matches_declared is False:
            note = (f"  <-- declared {row.declared}, formula gives {row.out_size}")
        print(f"  {row.label:<7} {row.op:<6} out {row.size_text():<14} "
              f"params {row.params:>12,}{note}")
        total += row.params
    flagged = [row.label for row in rows if row.flagged]
    print(f"  total parameters: {total:,}")
    print(f"  rows where the formula disagrees with the declared size: {flagged}")
    # After a flagged row the walk resumes from the DECLARED size, so each
    # subsequent transition is still judged on its own merits.

    print()
    print("the same walker on a custom 1-D stack")
    layers = [
        {"op": "conv", "filters": 8, "size": 5, "stride": 2, "pad": 0},
        {"op": "pool", "size": 2},
        {"op": "conv", "filters": 16, "size": 3, "stride": 1, "pad": 1},
        {"op": "dense", "units": 10},
    ]
    for row in walk_layer_table(64, 1, layers):
        print(f"  {row.label:<10} {row.op:<6} out {row.size_text():<10} params {row.params:>7,}")

    print()
    print("parameter budget: direct correlation bank vs. factored form")
    for channels, filters, taps in ((16, 4, 9), (4, 8, 3), (2, 2, 2)):
        rep = param_budget(channels=channels, filters=filters, taps=taps)
        verdict = (f"factored wins ({rep.ratio:.2f}x smaller)"
                   if rep.beneficial else "factorization not beneficial")
        print(f"  {channels} channels, {filters} filters, {taps} taps: "
              f"direct {rep.direct:>4}  factored {rep.factored:>4}  -> {verdict}")
    # The factored form replaces taps*channels weights per filter with
    # taps + channels, so it pays off once both factors are large enough.


if __name__ == "__main__":
    main()
