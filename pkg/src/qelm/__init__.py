"""Quantum extreme learning machine workbench.

A fixed random kicked-Ising reservoir on a qubit ring turns inputs into
quantum states; randomized local measurements turn states into features;
a ridge readout turns features into predictions. Submodules:

  circuit      hyperparameters, layer schedules, input binding
  statevec     exact simulation and Pauli expectation features
  mps          matrix-product-state compression and bond-dimension probes
  measurement  finite-shot sampling, shadow estimates, frequency tables
  eigentask    noise-ranked feature bases, cutoffs, capacity, scalings
  features     feature-matrix assembly, scaling, selection
  readout      ridge regression/classification, metrics, bootstrap CIs
  tasks        NARMA sequences and satellite-image tables
  tuner        multi-objective hyperparameter search and Pareto fronts
  experiments  end-to-end benchmark runs
  cli          command-line entry points
"""

__version__ = "0.1.0"
