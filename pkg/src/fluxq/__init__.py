"""fluxq: constraint-flux machine and extended quantum search simulators.

Two engines share one reporting surface:

* ``fluxq.boolsys`` / ``fluxq.machine`` -- systems of Boolean NAND equations
  and the idealized flux circuit that solves them in one nondeterministic
  stroke of the input piston.
* ``fluxq.qsim`` / ``fluxq.algorithms`` -- a dense statevector simulator with
  named registers, and the ancilla-extended Grover/Deutsch runs with their
  information-gain and reduction-entropy accounting.

``fluxq.cli`` is the command-line front end; ``fluxq.service`` exposes the
same commands over HTTP.
"""

__version__ = "0.1.0"

SCHEMA_VERSION = "1"
