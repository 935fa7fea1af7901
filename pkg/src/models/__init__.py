from src.models.measure import (
    ProbabilityMeasure,
    LogWeightOracle,
    TabulatedLogWeights,
    CountingOracle,
    RelabelView,
)
from src.models.generator import BasisIndex, GeneratorElement
from src.models.chain import SamplerKind, ProposalSet, AcceptanceDistribution, ChainState
from src.models.hops import TauCoefficients, HopsProgram
from src.models.spin_glass import SkModel, SpinConfiguration
