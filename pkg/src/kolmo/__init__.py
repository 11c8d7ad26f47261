"""Kolmogorov flow toolkit: pseudo-spectral DNS, symmetry reduction, and
data-driven low-dimensional models of the flow dynamics.

Subpackage map:

- ``spectral``        vorticity-form DNS on a doubly periodic grid, diagnostics
- ``symmetry``        phase alignment and discrete symmetry collapse
- ``nnet``            dense feedforward nets, manual backprop, Adam training
- ``reduction``       PCA basis and the PCA-residual autoencoder
- ``latent_dynamics`` discrete-time latent maps (pattern and phase) and rollouts
- ``labeling``        quiescent/bursting snapshot labeling
- ``stats``           joint PDFs, KL divergence, duration PDFs, phase MSD,
                      ensemble tracking errors
- ``burst_predict``   RBF-kernel SVM prediction of future bursting
- ``storage``         binary containers and CSV artifacts
- ``cli``             ``kolmo`` command-line pipelines
"""

__version__ = "0.1.0"
