"""
EchoViews Test Suite

Unit tests for the mesh core, view geometry, dataset generation, the
image-to-mesh network, evaluation, verification suites and the command line.
"""
