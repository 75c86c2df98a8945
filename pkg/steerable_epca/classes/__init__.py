"""This module is used to import all the classes in the classes folder."""

from .errors import *
from .imagestack import ImageStack
from .coeffblocks import CoeffBlocks
from .covariance import (
    BlockCovariance,
    RecolorMatrices,
    RotInvMean,
    ShrinkageComponents,
)
from .sepcamodel import SepcaModel
from .groundtruth import GroundTruthModel
