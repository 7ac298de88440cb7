"""Dump and reload group instances as delimited text for offline solver debugging."""

import csv

from ..qoe import QoeModelSpec, ServiceDemand
from .solver import GroupBudget, GroupUser

FIELDS = ("user_id", "structure", "omega1", "omega2", "omega3", "xi", "file_size_bits",
          "cycles_per_bit", "comm_gain", "sensing_gain", "impact", "noise_psd")


def _num(v):
    return repr(float(v))


def dump_instance(path, budget: GroupBudget, users):
    with open(path, "w", newline="") as fh:
        fh.write("# budget," + ",".join(map(_num, budget.as_array())) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIELDS)
        for u in users:
            writer.writerow([u.user_id, u.model.structure.value, *map(_num, u.model.omega), _num(u.model.xi),
                             _num(u.demand.file_size_bits), _num(u.demand.computing_density_cycles_per_bit),
                             _num(u.comm_gain), _num(u.sensing_gain), _num(u.impact), _num(u.noise_psd)])


def load_instance(path):
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("# budget,"):
            raise ValueError("missing budget line")
        budget = GroupBudget(*(float(v) for v in first.split(",")[1:4]))
        users = []
        for row in csv.DictReader(fh):
            model = QoeModelSpec(row["structure"], (float(row["omega1"]), float(row["omega2"]),
                                                    float(row["omega3"])), float(row["xi"]))
            demand = ServiceDemand(float(row["file_size_bits"]), float(row["cycles_per_bit"]))
            users.append(GroupUser(int(row["user_id"]), model, demand, float(row["comm_gain"]),
                                   float(row["sensing_gain"]), float(row["impact"]), float(row["noise_psd"])))
    return budget, users
