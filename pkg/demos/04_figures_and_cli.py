# Figure data and the command-line harness.
#
# Every figure is reproduced as a CSV table.  The same tables come out of the
# `fasfair fig N` subcommand, byte for byte, for any number of worker threads.

import tempfile
from pathlib import Path

from fasfair.cli import main
from fasfair.figures import run_figure

table = run_figure(4)
print(table.to_csv())

# Overrides replace scenario keys before the sweep.
fig1_hot = run_figure(1, {"p_dbm": 15.0})
opt = [r for r in fig1_hot.rows if r[1] != "exact"]
print("optimum rows at 15 dBm:", [(r[1], round(r[2], 6)) for r in opt])

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg = tmp / "uneven.cfg"
    cfg.write_text("# fewer ports at the central user\nn_c = 2\nn_e = 6\nw_c = 1\n")

    out = tmp / "bisect.csv"
    code = main(["noma-bisect", "--config", str(cfg), "--out", str(out)])
    print(f"\nnoma-bisect exit {code}:\n{out.read_text()}")

    # A bad value is rejected with the key and line number, exit code 2.
    cfg.write_text("theta = -1\n")
    print("bad config exit code:", main(["noma-special", "--config", str(cfg)]))

    # Monte Carlo validation, strict mode exits 4 on any 3-sigma miss.
    out = tmp / "mc.csv"
    code = main(["mc-validate", "--trials", "20000", "--strict", "--out", str(out)])
    print(f"\nmc-validate exit {code}")
    print("\n".join(out.read_text().splitlines()[:5]))
