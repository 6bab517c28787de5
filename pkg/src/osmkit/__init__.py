"""Shape reconstruction from one incident wave.

Forward scattering via the Lippmann-Schwinger volume equation, Cauchy-data
orthogonality-sampling indicators, numerical verification of the underlying
identities, a synthetic training-pair factory, and ingestion of Fresnel
Institute experimental files.
"""

__version__ = "0.1.0"
