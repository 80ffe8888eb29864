"""Rydberg-atom entangling-gate simulator and analysis library.

Subpackage map:

- `qcore`      dense evolution engines and spectral tools
- `ham`        registers, drive records, Hamiltonian builders
- `interact`   angular algebra and pair-interaction assembly
- `noise`      Doppler, position-fluctuation, decay, and blockade-error models
- `schedules`  pulse schedules and their simulation
- `protocols`  gate/entanglement protocol builders and solvers
- `metrics`    state, truth-table, and gate fidelities
- `runner`     config-driven experiment runner
- `service`    FastAPI app wrapping the runner
- `regress`    pinned-number regression suite
"""

__version__ = "0.1.0"
