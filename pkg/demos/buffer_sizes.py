"""How much a relay buffer helps once the queues have filled.

Long trials with a warmup are needed: a ten-packet buffer spends its first
few dozen slots filling and looks worse than a one-packet buffer until then.
"""

from relaysec import load_preset, sweep_buffer

cfg = load_preset("mimo").with_(trials=6, slots=200, warmup=80)
res = sweep_buffer(cfg, (1, 4, 10), ["BF-RJFS"])

for l, m, se, b in zip(res.axis, res.mean["BF-RJFS"], res.std_error["BF-RJFS"], res.bound["BF-RJFS"]):
    print(f"L={l:<3} secrecy {m:.3f} ± {se:.3f}   gain ceiling {b:.3f}")
