"""Cohesive and binding energy bookkeeping for adsorbent sheets (all in eV).

These are arithmetic post-processing steps on energies produced elsewhere
(e.g. by a DFT code); nothing here computes an energy from first principles.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

from .errors import AtomCountWarning, ZeroNormalization


@dataclass(frozen=True)
class Constituent:
    species: str
    energy: float
    count: int

    def __post_init__(self):
        if self.count <= 0:
            raise ValueError(f"constituent {self.species!r} needs a positive count")


@dataclass(frozen=True)
class CohesiveInput:
    e_system: float
    constituents: tuple[Constituent, ...]
    normalization: float
    n_atoms: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "constituents", tuple(self.constituents))
        total = sum(c.count for c in self.constituents)
        if self.n_atoms is None:
            object.__setattr__(self, "n_atoms", total)
        elif self.n_atoms != total:
            warnings.warn(
                f"declared atom count {self.n_atoms} differs from constituent total {total}",
                AtomCountWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class BindingInput:
    e_total: float
    e_substrate: float
    e_adsorbate: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.e_total, self.e_substrate, self.e_adsorbate)):
            raise ValueError("binding energies must be finite")


def cohesive_energy(inp: CohesiveInput) -> float:
    """``(E_system - sum_x count_x * E_x) / N``.

    The constituent term is the count-weighted sum of per-atom reference
    energies; ``n_atoms`` is only cross-checked against the counts.
    """
    if inp.normalization == 0:
        raise ZeroNormalization("normalization count N must be nonzero")
    if inp.normalization < 0:
        raise ValueError("normalization count N must be positive")
    reference = math.fsum(c.count * c.energy for c in inp.constituents)
    return (inp.e_system - reference) / inp.normalization


def binding_energy(inp: BindingInput) -> float:
    """``E_total - (E_substrate + E_adsorbate)``; negative means adsorption is favourable."""
    return inp.e_total - (inp.e_substrate + inp.e_adsorbate)


@dataclass
class SystemEnergies:
    name: str
    cohesive: CohesiveInput | None = None
    binding: BindingInput | None = None
    extra: dict = field(default_factory=dict)


def _cohesive_from_dict(d: dict) -> CohesiveInput:
    return CohesiveInput(
        e_system=float(d["e_system"]),
        constituents=tuple(
            Constituent(c["species"], float(c["energy"]), int(c["count"])) for c in d["constituents"]
        ),
        normalization=float(d["normalization"]),
        n_atoms=None if d.get("n_atoms") is None else int(d["n_atoms"]),
    )


def _binding_from_dict(d: dict) -> BindingInput:
    return BindingInput(float(d["e_total"]), float(d["e_substrate"]), float(d["e_adsorbate"]))


def load_systems_json(text: str) -> list[SystemEnergies]:
    """Read ``{"systems": [{"name", "cohesive"?, "binding"?}, ...]}``."""
    doc = json.loads(text)
    systems = []
    for entry in doc["systems"]:
        systems.append(SystemEnergies(
            name=str(entry["name"]),
            cohesive=_cohesive_from_dict(entry["cohesive"]) if entry.get("cohesive") else None,
            binding=_binding_from_dict(entry["binding"]) if entry.get("binding") else None,
        ))
    return systems


def load_systems_csv(text: str) -> list[SystemEnergies]:
    """Binding-only CSV with columns ``system,e_total,e_substrate,e_adsorbate``."""
    reader = csv.DictReader(io.StringIO(text))
    return [
        SystemEnergies(name=row["system"], binding=_binding_from_dict(row))
        for row in reader
    ]


def energy_report(systems: list[SystemEnergies], decimals: int = 2) -> dict:
    """Table-style report: one row per system with cohesive and binding energy.

    Raw values are kept at full precision; ``*_rounded`` fields mirror the
    two-decimal presentation of published tables.
    """
    rows = []
    for s in systems:
        row: dict = {"system": s.name}
        if s.cohesive is not None:
            e = cohesive_energy(s.cohesive)
            row.update(
                cohesive_energy_ev=e,
                cohesive_energy_ev_rounded=round(e, decimals),
                n_atoms=s.cohesive.n_atoms,
                normalization=s.cohesive.normalization,
            )
        if s.binding is not None:
            e = binding_energy(s.binding)
            row.update(binding_energy_ev=e, binding_energy_ev_rounded=round(e, decimals))
        rows.append(row)
    return {"units": "eV", "systems": rows}


def format_report_table(report: dict) -> str:
    lines = [f"{'system':<24}{'E_coh (eV)':>14}{'E_b (eV)':>12}"]
    for row in report["systems"]:
        coh = row.get("cohesive_energy_ev_rounded")
        eb = row.get("binding_energy_ev_rounded")
        lines.append(
            f"{row['system']:<24}{'' if coh is None else f'{coh:.2f}':>14}{'' if eb is None else f'{eb:.2f}':>12}"
        )
    return "\n".join(lines)
