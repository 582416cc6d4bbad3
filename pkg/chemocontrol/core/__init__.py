from chemocontrol.core.annotations import *
from chemocontrol.core.constants import *
from chemocontrol.core.cost import *
from chemocontrol.core.energy import *
from chemocontrol.core.errors import *
from chemocontrol.core.field_io import *
from chemocontrol.core.forward import *
from chemocontrol.core.grid import *
from chemocontrol.core.linearized import *
from chemocontrol.core.logging_config import *
from chemocontrol.core.optimize import *
from chemocontrol.core.solvers import *
from chemocontrol.core.tangent_adjoint import *
from chemocontrol.core.validation import *
