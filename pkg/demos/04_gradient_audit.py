"""Auditing analytic gradients against central finite differences.

Backpropagation computes dLoss/dparam in closed form.  The audit replays
each parameter with a +h and a -h probe and compares the analytic value to
the central-difference quotient.  Two subtleties make such audits honest
rather than flaky:

  * Kink exclusion.  The rectifier and the max pool are piecewise linear;
    if a probe pair straddles one of their switch points, the two probes
    evaluate DIFFERENT linear pieces and the quotient is meaningless.  The
    audit detects this by comparing the indicator-mask signature of the two
    probes and excludes (but reports) such parameters instead of scoring
    noise.

  * A noise floor.  A central difference carries intrinsic round-off of
    about eps * |loss| / h.  When the true gradient is tiny, dividing that
    noise by it produces a large bogus relative error.  Differences at or
    below the floor therefore read as relative error 0.

Run:  python3 demos/04_gradient_audit.py
"""

import numpy as np

from sigcnn import (
    ConvBlock,
    ConvLayer,
    DenseBlock,
    DenseLayer,
    Network,
    audit,
    forward,
    grad_check,
)


def small_net(seed: int) -> Network:
    rng = np.random.default_rng(seed)
    conv = ConvLayer(weights=rng.normal(0, 0.5, size=(2, 1, 3)), bias=rng.normal(0, 0.1, size=2))
    hidden = DenseLayer(weights=rng.normal(0, 0.5, size=(3, 8)), bias=rng.normal(0, 0.1, size=3))
    out = DenseLayer(weights=rng.normal(0, 0.5, size=(2, 3)))
    return Network(
        input_len=6,
        conv_blocks=[ConvBlock(conv)],
        dense_blocks=[DenseBlock(hidden, relu=True), DenseBlock(out)],
        loss_kind="cross_entropy",
    )


def main() -> None:
    rng = np.random.default_rng(11)
    net = small_net(5)
    x = rng.normal(size=6)
    target = [0.0, 1.0]

    report = grad_check(net, x, target)
    print(f"parameters checked : {len(report.checks) - report.excluded}")
    print(f"kink-excluded      : {report.excluded}")
    print(f"max relative error : {report.max_rel_err:.3e}")
    print(f"passes 1e-6        : {report.passed(1e-6)}")

    print()
    print("a few individual checks (analytic vs. central difference):")
    shown = 0
    for check in report.checks:
        if check.excluded:
            continue
        print(f"  {check.path:<28} analytic {check.analytic:+.9e}   "
              f"numeric {check.numeric:+.9e}   rel err {check.rel_err:.1e}")
        shown += 1
        if shown == 5:
            break

    # Force a kink: set one conv bias so a pre-activation sits exactly at
    # the rectifier switch point, and watch the audit exclude instead of
    # failing.
    print()
    print("kink exclusion in action")
    kinked = small_net(5)
    _, tape = forward(kinked, x)
    kinked.conv_blocks[0].layer.bias[0] -= tape.conv[0].pre_act[0, 0]
    kreport = grad_check(kinked, x, target)
    excluded_paths = [c.path for c in kreport.checks if c.excluded]
    print(f"  pre-activation pinned to 0.0 -> {kreport.excluded} parameter(s) excluded")
    print(f"  first few: {excluded_paths[:4]}")
    print(f"  audit still passes on the remaining checks: {kreport.passed(1e-6)}")

    # Step-size sanity: an oversized h produces genuine truncation error,
    # which the audit must surface, not mask.  Wide probes also straddle
    # more kinks, so the excluded count climbs with h.
    print()
    print("step-size sweep on one clean case")
    for h in (1e-6, 1e-2, 0.5, 1.0):
        r = grad_check(net, x, target, h=h)
        flag = "pass" if r.passed(1e-6) else f"FAIL at {r.worst_path}"
        print(f"  h = {h:<7.0e} max rel err {r.max_rel_err:.3e}   "
              f"excluded {r.excluded:>2}   {flag}")

    # The multi-case form aggregates and names the worst offender.
    print()
    cases = [(small_net(s), np.random.default_rng(s).normal(size=6), [1.0, 0.0])
             for s in (1, 2, 3, 4)]
    max_rel, worst, reports = audit(cases)
    print(f"audit over {len(cases)} cases: max rel err {max_rel:.3e}, "
          f"worst {worst if worst is not None else 'none (all at the floor)'}")


if __name__ == "__main__":
    main()
