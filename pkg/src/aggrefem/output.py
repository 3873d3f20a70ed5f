# -*- coding: utf-8 -*-

"""
Run outputs: diagnostics CSV, legacy ASCII VTK snapshots and the sinks
that stream them during a run.
"""
import csv
import logging

from pathlib import Path
from typing import Iterable
from typing import List
from typing import Optional
from typing import Protocol

import meshio
import numpy as np

from .exceptions import OutputError
from .fe_space import NodalField
from .mesh import Mesh

log = logging.getLogger('aggrefem.output')

CSV_HEADER = ('t', 'mass', 'l1', 'linf', 'min', 'fp_iters', 'lin_residual')


def _g17(value: float) -> str:
    return '%.17g' % value


def _csv_row(record) -> List[str]:
    return [
        _g17(record.t), _g17(record.mass), _g17(record.l1), _g17(record.linf),
        _g17(record.min), str(int(record.fp_iters)), _g17(record.lin_residual),
    ]


def write_diagnostics_csv(series: Iterable, path) -> Path:
    """
    Write one row per DiagnosticsRecord, floats with 17 significant digits.

    Raises:
        ValueError: for an empty series
        OutputError: if the file cannot be written
    """
    series = list(series)
    if not series:
        raise ValueError("diagnostics series is empty")
    path = Path(path)
    try:
        with path.open('w', newline='', encoding='ascii') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(CSV_HEADER)
            writer.writerows(_csv_row(record) for record in series)
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    return path


def _vtk_mesh(mesh: Mesh, field: Optional[NodalField]) -> meshio.Mesh:
    points = np.column_stack([mesh.nodes, np.zeros(mesh.n_nodes)])
    point_data = {} if field is None else {'rho': np.asarray(field.values, dtype=np.float64)}
    return meshio.Mesh(points, [('triangle', mesh.elements)], point_data=point_data)


def write_vtk_snapshot(mesh: Mesh, field: Optional[NodalField], path) -> Path:
    """
    Legacy ASCII VTK (4.2 layout) unstructured grid; point i is mesh node i.

    With field=None only the geometry is written.

    Raises:
        ValueError: if the field belongs to another mesh
        OutputError: if the file cannot be written
    """
    if field is not None and field.mesh is not mesh:
        raise ValueError("field is bound to a different mesh")
    path = Path(path)
    try:
        meshio.write(path, _vtk_mesh(mesh, field), file_format='vtk', binary=False, fmt_version='4.2')
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    except meshio.WriteError as e:
        raise OutputError(path, str(e)) from e
    return path


class Sink(Protocol):
    """Receives run output; close() is always called once"""

    def record(self, record) -> None:
        ...

    def snapshot(self, mesh: Mesh, state) -> None:
        ...

    def close(self) -> None:
        ...


class CsvDiagnosticsSink:
    """Streams diagnostics rows, flushing after each one"""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = None
        self._writer = None
        self.rows = 0

    def _open(self):
        try:
            self._fh = self.path.open('w', newline='', encoding='ascii')
            self._writer = csv.writer(self._fh, lineterminator='\n')
            self._writer.writerow(CSV_HEADER)
        except OSError as e:
            raise OutputError(self.path, e.strerror or str(e)) from e

    def record(self, record) -> None:
        if self._fh is None:
            self._open()
        try:
            self._writer.writerow(_csv_row(record))
            self._fh.flush()
        except OSError as e:
            raise OutputError(self.path, e.strerror or str(e)) from e
        self.rows += 1

    def snapshot(self, mesh: Mesh, state) -> None:
        pass

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
            log.info("wrote %d diagnostics rows to %s", self.rows, self.path)


class VtkSnapshotSink:
    """One VTK file per snapshot, named after the step index"""

    def __init__(self, directory, pattern: str = 'rho_{step:05d}.vtk'):
        self.directory = Path(directory)
        self.pattern = pattern
        self.written: List[Path] = []

    def record(self, record) -> None:
        pass

    def snapshot(self, mesh: Mesh, state) -> None:
        path = self.directory / self.pattern.format(step=state.step_index, t=state.t)
        write_vtk_snapshot(mesh, state.rho, path)
        self.written.append(path)

    def close(self) -> None:
        log.info("wrote %d snapshots to %s", len(self.written), self.directory)


class MemorySink:
    """Keeps every record and snapshot in memory"""

    def __init__(self):
        self.records = []
        self.states = []
        self.closed = False

    def record(self, record) -> None:
        self.records.append(record)

    def snapshot(self, mesh: Mesh, state) -> None:
        self.states.append(state)

    def close(self) -> None:
        self.closed = True
