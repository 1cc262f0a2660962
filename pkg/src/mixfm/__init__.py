"""
CLI tool to train factorization machines on sparse data with Mixup.

Trains 2-way factorization machines with plain, copied, mixed (MixFM) and
saliency-guided mixed (SMFM) augmentation, evaluates them with AUC/LogLoss,
and computes the generalization bounds of FM and MixFM for trained models.
"""

try:
    from ._version import __version__
except ImportError:
    from importlib.metadata import version
    __version__ = version("mixfm")
