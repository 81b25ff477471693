"""Sweep the source/relay power split with and without interference cancellation."""

from relaysec import load_preset, sweep_eta

cfg = load_preset("mimo").with_(trials=30, slots=10, warmup=1)
res = sweep_eta(cfg, ["RJFS", "RJFS:noic"])

for j, eta in enumerate(res.axis):
    ic, no = res.mean["RJFS"][j], res.mean["RJFS:noic"][j]
    print(f"eta={eta:<4} source {eta * cfg.power:5.1f}  relays {(2 - eta) * cfg.power:5.1f}  "
          f"IC {ic:.3f}  no IC {no:.3f}")
