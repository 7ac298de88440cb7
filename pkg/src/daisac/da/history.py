"""DA window history as comma-delimited text, one row per (user, window)."""

import csv

from .fitting import DaWindow

HEADER = ("user_id", "window", "mean_latency_s", "mean_quality",
          "mean_behavior_dynamics", "mean_env_complexity", "mean_mos")


def export_history(path, history):
    """``history`` maps user id -> list of DaWindow."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for uid in sorted(history):
            for w in history[uid]:
                writer.writerow([uid, w.index, repr(w.mean_latency_s), repr(w.mean_quality),
                                 repr(w.mean_behavior_dynamics), repr(w.mean_env_complexity),
                                 repr(w.mean_mos)])


def import_history(path):
    history = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != HEADER:
            raise ValueError(f"unexpected DA history header {reader.fieldnames}")
        for row in reader:
            uid = int(row["user_id"])
            history.setdefault(uid, []).append(DaWindow(
                int(row["window"]), float(row["mean_latency_s"]), float(row["mean_quality"]),
                float(row["mean_behavior_dynamics"]), float(row["mean_env_complexity"]),
                float(row["mean_mos"])))
    return history
