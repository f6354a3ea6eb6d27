"""
Cohesive and binding energies
=============================

Bookkeeping on energies from an external DFT code: nothing is computed
from first principles here.
"""

from co2lstm.energy import (
    BindingInput,
    CohesiveInput,
    Constituent,
    binding_energy,
    cohesive_energy,
    energy_report,
    format_report_table,
    SystemEnergies,
)

###############################################################################
# Cohesive energy per atom of a 36-atom sheet: system energy minus the
# count-weighted isolated-atom energies, divided by the normalization count.

sheet = CohesiveInput(
    e_system=-263.66,
    constituents=(Constituent("Sc", -2.0, 18), Constituent("Al", -1.5, 1), Constituent("B", -1.0, 17)),
    normalization=36,
)
print("E_coh =", round(cohesive_energy(sheet), 4), "eV")

###############################################################################
# Binding energy of an adsorbed CO2 molecule; negative means it sticks.

co2 = BindingInput(e_total=-1271.81, e_substrate=-1245.5, e_adsorbate=-23.0)
print("E_b =", round(binding_energy(co2), 4), "eV")

###############################################################################
# The same numbers as a report table.

print(format_report_table(energy_report([SystemEnergies("sheet + CO2", sheet, co2)])))
