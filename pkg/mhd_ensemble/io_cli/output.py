'''
CSV tables and VTK snapshots.
'''

import csv
import logging
import os

import numpy as np
import vtk
from vtk.util import numpy_support

from ..exceptions import ConfigurationError, InvalidArgumentError
from ..mms_verify import RateRow, RateTable

logger = logging.getLogger(__name__)

__all__ = []

RATE_COLUMNS = ('h', 'dt', 'err_v', 'rate_v', 'err_w', 'rate_w')
__all__.append("RATE_COLUMNS")
ENERGY_COLUMNS = ('n', 'member', 'norm_v', 'norm_w', 'ext_v', 'ext_w', 'dissipation', 'forcing')
__all__.append("ENERGY_COLUMNS")


def _fmt(value):
    return '' if value is None else f'{value:.6g}'


def _open_for_writing(path):
    directory = os.path.dirname(path)
    try:
        if directory:
            os.makedirs(directory, exist_ok=True)
        return open(path, 'w', newline='')
    except OSError as err:
        raise ConfigurationError(f'cannot write {path}: {err}')


__all__.append("emit_rate_table")
def emit_rate_table(table, path):
    '''
    CSV with columns h,dt,err_v,rate_v,err_w,rate_w at 6 significant digits; rates of the
    first row are left blank.
    '''
    if len(table) == 0:
        raise InvalidArgumentError('cannot emit an empty rate table')
    with _open_for_writing(path) as out:
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(RATE_COLUMNS)
        for row in table:
            writer.writerow([_fmt(value) for value in row.as_tuple()])
    logger.info(f'wrote {len(table)} rows to {path}')
    return path


__all__.append("read_rate_table")
def read_rate_table(path):
    '''RateTable from a file written by emit_rate_table'''
    try:
        with open(path, newline='') as source:
            reader = csv.DictReader(source)
            if tuple(reader.fieldnames or ()) != RATE_COLUMNS:
                raise ConfigurationError(f'{path} does not have the columns {",".join(RATE_COLUMNS)}')
            rows = []
            for record in reader:
                values = {key: (float(record[key]) if record[key] != '' else None) for key in RATE_COLUMNS}
                rows.append(RateRow(**values))
    except OSError as err:
        raise ConfigurationError(f'cannot read {path}: {err}')
    return RateTable(rows)


__all__.append("emit_energy_report")
def emit_energy_report(report, path):
    '''
    Per-level, per-member energy terms followed by the lhs/rhs summary of each member
    '''
    with _open_for_writing(path) as out:
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(ENERGY_COLUMNS)
        for row in report.rows():
            writer.writerow([row[0], row[1]] + [_fmt(value) for value in row[2:]])
    summary = os.path.splitext(path)[0] + '_summary.csv'
    with _open_for_writing(summary) as out:
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(('member', 'lhs', 'rhs', 'holds'))
        for j, (lhs, rhs, holds) in enumerate(zip(report.lhs, report.rhs, report.holds), start=1):
            writer.writerow([j, _fmt(lhs), _fmt(rhs), int(holds)])
    logger.info(f'wrote energy report to {path} and {summary}')
    return path


__all__.append("emit_perf_report")
def emit_perf_report(report, path):
    '''key,value lines of a flat perf report'''
    with _open_for_writing(path) as out:
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(('key', 'value'))
        for key, value in report.items():
            writer.writerow([key, _fmt(value) if isinstance(value, float) else value])
    return path


def _vector_array(name, values):
    ''' (N,2) -> 3-component vtkDoubleArray with zero z '''
    padded = np.zeros((len(values), 3))
    padded[:, :2] = values
    array = numpy_support.numpy_to_vtk(padded, deep=1, array_type=vtk.VTK_DOUBLE)
    array.SetName(name)
    return array


def _scalar_array(name, values):
    array = numpy_support.numpy_to_vtk(np.ascontiguousarray(values, dtype=float), deep=1,
                                       array_type=vtk.VTK_DOUBLE)
    array.SetName(name)
    return array


def _grid(space):
    grid = vtk.vtkUnstructuredGrid()
    points = vtk.vtkPoints()
    for i, (x, y) in enumerate(space.node_coords):
        points.InsertPoint(i, float(x), float(y), 0.)
    grid.SetPoints(points)
    grid.Allocate(len(space.cell_nodes))
    # Q2 local order (corners, edge midpoints, centre) is VTK's biquadratic quad order
    for nodes in space.cell_nodes:
        grid.InsertNextCell(vtk.VTK_BIQUADRATIC_QUAD, 9, [int(i) for i in nodes])
    return grid


def _write_fields(space, u, B, path):
    grid = _grid(space)
    ux, uy = space.split(u)
    Bx, By = space.split(B)
    data = grid.GetPointData()
    data.AddArray(_vector_array('u', np.column_stack([ux, uy])))
    data.AddArray(_vector_array('B', np.column_stack([Bx, By])))
    data.AddArray(_scalar_array('B_magnitude', np.hypot(Bx, By)))
    writer = vtk.vtkUnstructuredGridWriter()
    writer.SetFileName(path)
    writer.SetFileTypeToASCII()
    writer.SetInputData(grid)
    if writer.Write() != 1:
        raise ConfigurationError(f'VTK writer failed for {path}')
    return path


__all__.append("write_vtk_snapshot")
def write_vtk_snapshot(space, snapshot, out_dir):
    '''
    Legacy ASCII VTK files of a snapshot: channel_ensemble_<step>.vtk with the ensemble means and
    channel_member<j>_<step>.vtk per member, each with point fields u, B and B_magnitude.

    Returns:
        list of written paths
    '''
    os.makedirs(out_dir, exist_ok=True)
    paths = [_write_fields(space, snapshot.mean_u, snapshot.mean_B,
                           os.path.join(out_dir, f'channel_ensemble_{snapshot.step:06d}.vtk'))]
    for j, (u, B) in enumerate(zip(snapshot.member_u, snapshot.member_B), start=1):
        paths.append(_write_fields(space, u, B, os.path.join(out_dir, f'channel_member{j}_{snapshot.step:06d}.vtk')))
    logger.debug(f'snapshot {snapshot.step}: wrote {paths}')
    return paths
