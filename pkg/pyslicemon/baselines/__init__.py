from pyslicemon.baselines.pint import PintLikeScheme, runPintLike
from pyslicemon.baselines.sketch import SketchLikeScheme, runSketchLike
from pyslicemon.baselines.static import StaticController, StaticPolicy, runStatic
