"""
lnakit
======

Two-port analysis and single-frequency design of low-noise amplifiers:
Touchstone ingestion, stability tests and circles, gain and noise circles,
simultaneous / noise-constrained source and load selection, single-stub and
quarter-wave matching with microstrip dimensions, and Smith-chart output.

Commands:
  - analyze: stability verdict, MAG, unilateral bounds, circle geometry
  - design:  Gamma_S / Gamma_L selection and matching networks
  - circles: stability, available-gain and noise circles
  - cascade: receiver-chain noise figure
  - match:   single-stub network for a reflection coefficient
"""

__version__ = "0.1.0"
