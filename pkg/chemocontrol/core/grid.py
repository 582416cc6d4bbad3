'''
Uniform rectangular grids, cell-centred fields and the homogeneous-Neumann
finite-volume operators built on them.

Every operator exists twice: as array arithmetic (used by the forward
scheme) and as a ``scipy.sparse`` matrix acting on C-order flattened cells
and faces (used wherever an exact transpose is needed). Face arrays for
axis ``k`` have ``cells[k] + 1`` entries along that axis; the first and last
are boundary faces and are zero for every flux the package builds, which
encodes the no-flux boundary condition.
'''

import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from chemocontrol.core.constants import INF, MAX_DIM, MIN_DIM
from chemocontrol.core.errors import ArgumentError
from chemocontrol.core.validation import (
    require_exponent,
    require_finite,
    require_positive,
    require_shape
)

__all__ = [
    'Grid',
    'ScalarField',
    'VectorField',
    'SubdomainMask',
    'laplacian_neumann',
    'face_gradient',
    'div_face_flux',
    'integrate',
    'lp_space_norm',
    'bochner_norm',
    'gradient_faces',
    'divergence_faces',
    'upwind_faces',
    'faces_to_cells',
    'inner_product',
    'space_time_norm',
    'flatten_faces',
    'unflatten_faces',
    'gradient_matrix',
    'laplacian_matrix',
    'upwind_matrix',
    'face_average_matrix'
]

Faces = tuple[np.ndarray, ...]


@dataclass(frozen=True)
class Grid:
    '''
    A uniform axis-aligned box ``[0, extent[0]] x ... x [0, extent[dim-1]]``
    split into ``cells[k]`` cells along axis ``k``.
    '''
    cells: tuple[int, ...]
    extent: tuple[float, ...]
    spacing: tuple[float, ...] = field(init=False)
    cell_volume: float = field(init=False)

    def __post_init__(self) -> None:
        cells = tuple(int(n) for n in self.cells)
        extent = tuple(float(x) for x in self.extent)
        if not MIN_DIM <= len(cells) <= MAX_DIM:
            raise ArgumentError(f"Grid dimension must be 1, 2 or 3, got {len(cells)}.")
        if len(extent) != len(cells):
            raise ArgumentError(f"Got {len(cells)} cell counts but {len(extent)} extents.")
        if any(n < 1 for n in cells):
            raise ArgumentError(f"Cell counts must be positive, got {cells}.")
        for x in extent:
            require_positive('extent', x)
        spacing = tuple(x / n for x, n in zip(extent, cells))
        object.__setattr__(self, 'cells', cells)
        object.__setattr__(self, 'extent', extent)
        object.__setattr__(self, 'spacing', spacing)
        object.__setattr__(self, 'cell_volume', math.prod(spacing))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def n_cells(self) -> int:
        return math.prod(self.cells)

    @property
    def volume(self) -> float:
        '''Measure of the whole domain.'''
        return math.prod(self.extent)

    @property
    def h_min(self) -> float:
        return min(self.spacing)

    def face_shape(self, axis: int) -> tuple[int, ...]:
        '''Shape of the face array normal to the given axis.'''
        shape = list(self.cells)
        shape[axis] += 1
        return tuple(shape)

    @property
    def n_faces(self) -> int:
        return sum(math.prod(self.face_shape(k)) for k in range(self.dim))

    def centers(self) -> tuple[np.ndarray, ...]:
        '''Cell-centre coordinates, one ``cells``-shaped array per axis.'''
        axes = [(np.arange(n) + 0.5) * h for n, h in zip(self.cells, self.spacing)]
        return tuple(np.meshgrid(*axes, indexing='ij'))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.cells)

    def zero_faces(self) -> Faces:
        return tuple(np.zeros(self.face_shape(k)) for k in range(self.dim))


@dataclass(frozen=True, eq=False)
class ScalarField:
    '''One real value per cell. The stored array is read-only.'''
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.cells and values.size == self.grid.n_cells:
            values = values.reshape(self.grid.cells)
        require_shape('values', values, self.grid.cells)
        require_finite('values', values)
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> 'ScalarField':
        return cls(grid, np.full(grid.cells, float(value)))

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(cells={self.grid.cells}, min={self.values.min()!r}, max={self.values.max()!r})"


@dataclass(frozen=True, eq=False)
class VectorField:
    '''
    One real value per cell face, one array per axis. Boundary faces are
    required to be exactly zero.
    '''
    grid: Grid
    faces: Faces

    def __post_init__(self) -> None:
        if len(self.faces) != self.grid.dim:
            raise ArgumentError(
                f"Expected {self.grid.dim} face arrays, got {len(self.faces)}.")
        faces: list[np.ndarray] = []
        for k, f in enumerate(self.faces):
            f = np.array(f, dtype=float)
            require_shape(f'faces[{k}]', f, self.grid.face_shape(k))
            require_finite(f'faces[{k}]', f)
            boundary = (np.take(f, 0, axis=k), np.take(f, -1, axis=k))
            if any(np.any(b != 0.0) for b in boundary):
                raise ArgumentError(
                    f"Boundary faces along axis {k} must be zero (no-flux condition).")
            f.flags.writeable = False
            faces.append(f)
        object.__setattr__(self, 'faces', tuple(faces))


@dataclass(frozen=True, eq=False)
class SubdomainMask:
    '''Indicator of the control subdomain, one boolean per cell.'''
    grid: Grid
    indicator: np.ndarray

    def __post_init__(self) -> None:
        indicator = np.array(self.indicator, dtype=bool)
        require_shape('indicator', indicator, self.grid.cells)
        if not indicator.any():
            raise ArgumentError("The control subdomain contains no cell.")
        indicator.flags.writeable = False
        object.__setattr__(self, 'indicator', indicator)

    @classmethod
    def from_box(cls, grid: Grid, lower: Sequence[float], upper: Sequence[float]) -> 'SubdomainMask':
        '''
        Select the cells whose centres lie in the closed box
        ``[lower, upper]``.
        '''
        if len(lower) != grid.dim or len(upper) != grid.dim:
            raise ArgumentError(
                f"Mask box needs {grid.dim} lower and upper bounds.")
        inside = np.ones(grid.cells, dtype=bool)
        for x, lo, hi in zip(grid.centers(), lower, upper):
            inside &= (x >= lo) & (x <= hi)
        return cls(grid, inside)

    @classmethod
    def full(cls, grid: Grid) -> 'SubdomainMask':
        return cls(grid, np.ones(grid.cells, dtype=bool))

    @property
    def weights(self) -> np.ndarray:
        '''The indicator as 0.0/1.0 floats.'''
        return self.indicator.astype(float)

    @property
    def volume(self) -> float:
        return float(self.indicator.sum()) * self.grid.cell_volume


#######################
# Array-level kernels #
#######################

def _pad_axis(values: np.ndarray, axis: int) -> np.ndarray:
    width = [(0, 0)] * values.ndim
    width[axis] = (1, 1)
    return np.pad(values, width)


def _interior(values: np.ndarray, axis: int) -> np.ndarray:
    index = [slice(None)] * values.ndim
    index[axis] = slice(1, -1)
    return values[tuple(index)]


def gradient_faces(grid: Grid, values: np.ndarray) -> Faces:
    '''Two-point face differences with zero boundary faces.'''
    return tuple(
        _pad_axis(np.diff(values, axis=k) / h, k)
        for k, h in enumerate(grid.spacing))


def divergence_faces(grid: Grid, faces: Faces) -> np.ndarray:
    '''Cell-wise sum over axes of (right face - left face) / h.'''
    return reduce(
        np.add,
        (np.diff(f, axis=k) / h for k, (f, h) in enumerate(zip(faces, grid.spacing))))


def upwind_faces(grid: Grid, values: np.ndarray, velocity: Faces) -> Faces:
    '''
    Face values of a cell field taken from the upwind cell of the given
    face velocity. A zero velocity selects the lower-index cell; boundary
    faces are zero.
    '''
    out: list[np.ndarray] = []
    for k in range(grid.dim):
        left = np.take(values, np.arange(grid.cells[k] - 1), axis=k)
        right = np.take(values, np.arange(1, grid.cells[k]), axis=k)
        chosen = np.where(_interior(velocity[k], k) >= 0.0, left, right)
        out.append(_pad_axis(chosen, k))
    return tuple(out)


def faces_to_cells(grid: Grid, faces: Faces) -> np.ndarray:
    '''
    Sum over axes of the average of the two faces bounding each cell.
    Applied to squared face gradients this gives a cell value of |grad w|^2.
    '''
    total = grid.zeros()
    for k, f in enumerate(faces):
        lo = np.take(f, np.arange(grid.cells[k]), axis=k)
        hi = np.take(f, np.arange(1, grid.cells[k] + 1), axis=k)
        total = total + 0.5 * (lo + hi)
    return total


def inner_product(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    '''Cell-volume weighted dot product of two cell (or series) arrays.'''
    return float(np.sum(a * b)) * grid.cell_volume


def _lp_norm(grid: Grid, values: np.ndarray, p: float) -> float:
    if p == INF:
        return float(np.max(np.abs(values))) if values.size else 0.0
    return float(np.sum(np.abs(values) ** p) * grid.cell_volume) ** (1.0 / p)


def space_time_norm(grid: Grid, series: np.ndarray, p_time: float, p_space: float, dt: float) -> float:
    '''
    Mixed ``L^{p_time}(L^{p_space})`` norm of a ``(nodes, *cells)`` array by
    the rectangle rule: every node given carries the weight ``dt``.
    '''
    require_exponent('p_time', p_time)
    require_exponent('p_space', p_space)
    require_positive('dt', dt)
    if len(series) == 0:
        raise ArgumentError("Cannot take the norm of an empty series.")
    spatial = np.array([_lp_norm(grid, w, p_space) for w in series])
    if p_time == INF:
        return float(spatial.max())
    return float(np.sum(dt * spatial ** p_time)) ** (1.0 / p_time)


###################
# Field operators #
###################

def laplacian_neumann(w: ScalarField) -> ScalarField:
    '''
    Discrete Laplacian with homogeneous Neumann boundary conditions.

    The (2 dim + 1)-point stencil with mirrored ghost cells, evaluated as
    the divergence of the face gradient so that the no-flux boundary
    makes the cell sum vanish identically.

    Parameters
    ----------
    w : ScalarField
        The field to be differentiated.

    Returns
    -------
    ScalarField
        The discrete Laplacian of ``w``.
    '''
    grid = w.grid
    return ScalarField(grid, divergence_faces(grid, gradient_faces(grid, w.values)))


def face_gradient(w: ScalarField) -> VectorField:
    '''
    Face-normal differences ``(w[i+1] - w[i]) / h`` on interior faces and
    zero on boundary faces.
    '''
    return VectorField(w.grid, gradient_faces(w.grid, w.values))


def div_face_flux(flux: VectorField) -> ScalarField:
    '''
    Conservative divergence of a face flux.

    Parameters
    ----------
    flux : VectorField
        Face values; boundary faces are zero by construction of the type.

    Returns
    -------
    ScalarField
        ``sum_k (F[i+1/2] - F[i-1/2]) / h_k`` in every cell.
    '''
    return ScalarField(flux.grid, divergence_faces(flux.grid, flux.faces))


def integrate(w: ScalarField) -> float:
    '''Midpoint quadrature of a cell field.'''
    return float(np.sum(w.values)) * w.grid.cell_volume


def lp_space_norm(w: ScalarField, p: float) -> float:
    '''
    Discrete ``L^p(Omega)`` norm.

    Parameters
    ----------
    w : ScalarField
        The field to be measured.
    p : float
        Exponent, at least 1; ``math.inf`` gives the maximum norm.

    Returns
    -------
    float
        ``(sum |w|^p vol)^(1/p)`` or ``max |w|``.

    Raises
    ------
    ArgumentError
        If p < 1.
    '''
    require_exponent('p', p)
    return _lp_norm(w.grid, w.values, p)


def bochner_norm(series: Sequence[ScalarField], p_time: float, p_space: float, dt: float) -> float:
    '''
    Discrete ``L^{p_time}(0, T; L^{p_space}(Omega))`` norm of a time-indexed
    sequence of fields, rectangle rule in time.

    Raises
    ------
    ArgumentError
        If the sequence is empty, an exponent is below 1 or dt <= 0.
    '''
    if len(series) == 0:
        raise ArgumentError("Cannot take the norm of an empty series.")
    grid = series[0].grid
    return space_time_norm(grid, np.stack([w.values for w in series]), p_time, p_space, dt)


##################
# Sparse kernels #
##################

def _axis_operator(grid: Grid, axis: int, block: sp.spmatrix) -> sp.csr_matrix:
    before = math.prod(grid.cells[:axis])
    after = math.prod(grid.cells[axis + 1:])
    return sp.kron(sp.identity(before), sp.kron(block, sp.identity(after)), format='csr')


def _difference_1d(n: int, h: float) -> sp.csr_matrix:
    rows = np.arange(1, n)
    data = np.concatenate([np.full(n - 1, -1.0 / h), np.full(n - 1, 1.0 / h)])
    return sp.csr_matrix(
        (data, (np.concatenate([rows, rows]), np.concatenate([rows - 1, rows]))),
        shape=(n + 1, n))


def _selector_1d(n: int, offset: int) -> sp.csr_matrix:
    rows = np.arange(1, n)
    return sp.csr_matrix((np.ones(n - 1), (rows, rows - 1 + offset)), shape=(n + 1, n))


def flatten_faces(faces: Iterable[np.ndarray]) -> np.ndarray:
    '''Concatenate C-order flattened face arrays, axis by axis.'''
    return np.concatenate([f.ravel() for f in faces])


def unflatten_faces(grid: Grid, flat: np.ndarray) -> Faces:
    '''Inverse of ``flatten_faces``.'''
    out: list[np.ndarray] = []
    start = 0
    for k in range(grid.dim):
        shape = grid.face_shape(k)
        size = math.prod(shape)
        out.append(flat[start:start + size].reshape(shape))
        start += size
    return tuple(out)


@lru_cache(maxsize=32)
def gradient_matrix(grid: Grid) -> sp.csr_matrix:
    '''
    The face gradient as an ``(n_faces, n_cells)`` matrix. The divergence of
    face fluxes is exactly ``-gradient_matrix(grid).T``.
    '''
    blocks = [
        _axis_operator(grid, k, _difference_1d(grid.cells[k], grid.spacing[k]))
        for k in range(grid.dim)]
    return sp.vstack(blocks, format='csr')


@lru_cache(maxsize=32)
def laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    '''The Neumann Laplacian ``-G^T G``; symmetric with zero row sums.'''
    g = gradient_matrix(grid)
    return (-(g.T @ g)).tocsr()


@lru_cache(maxsize=32)
def _selectors(grid: Grid) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    '''Face-from-cell selections of the lower and upper neighbour.'''
    return tuple(
        sp.vstack(
            [_axis_operator(grid, k, _selector_1d(grid.cells[k], offset)) for k in range(grid.dim)],
            format='csr')
        for offset in (0, 1))  # type: ignore[return-value]


def upwind_matrix(grid: Grid, velocity: np.ndarray) -> sp.csr_matrix:
    '''
    The upwind face-value selection for a flattened face velocity, as an
    ``(n_faces, n_cells)`` matrix. Same branch rule as ``upwind_faces``.
    '''
    left, right = _selectors(grid)
    forward = (velocity >= 0.0).astype(float)
    return (sp.diags(forward) @ left + sp.diags(1.0 - forward) @ right).tocsr()


def _average_1d(n: int) -> sp.csr_matrix:
    rows = np.arange(n)
    return sp.csr_matrix(
        (np.full(2 * n, 0.5), (np.concatenate([rows, rows]), np.concatenate([rows, rows + 1]))),
        shape=(n, n + 1))


@lru_cache(maxsize=32)
def face_average_matrix(grid: Grid) -> sp.csr_matrix:
    '''
    ``faces_to_cells`` as an ``(n_cells, n_faces)`` matrix: each cell gets
    the mean of its two bounding faces, summed over axes.
    '''
    blocks = [_axis_operator(grid, k, _average_1d(grid.cells[k])) for k in range(grid.dim)]
    return sp.hstack(blocks, format='csr')
