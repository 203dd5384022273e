import json
import os

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from ConvexPrior.commands.commands import build_parser, main
from ConvexPrior.commands.config import DEFAULTS, build_run_config, get_config, parse_gamma_list
from ConvexPrior.commands.utils import (
    field_from_csv,
    field_from_pgm,
    field_to_csv,
    field_to_pgm,
    read_field,
    sibling_path,
    write_field,
)
from ConvexPrior.core.ConvexityLosses import LossKind
from ConvexPrior.core.ConvexPriorErrors import FieldFormatError, InvalidArgumentError
from ConvexPrior.core.ScalarField import ScalarField
from ConvexPrior.oracle.shapes import default_shape_spec, make_shape


@pytest.fixture
def config_file(tmp_path):
    """Config that keeps debug.log inside the test directory"""
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'io': {'logs_directory': str(tmp_path / 'logs')}}))
    return str(path)


def _write_shape(tmp_path, kind, n=64):
    path = str(tmp_path / f'{kind}.csv')
    write_field(path, make_shape(default_shape_spec(kind, n, n), n, n))
    return path


def _paraboloid_csv(tmp_path, n=41):
    rows, cols = np.mgrid[0:n, 0:n]
    rho2 = (rows - n // 2) ** 2 + (cols - n // 2) ** 2
    path = str(tmp_path / 'paraboloid.csv')
    write_field(path, ScalarField(1.0 - rho2 / (2.0 * rho2.max()), is_mask=True))
    return path


# field files

def test_csv_round_trip_is_exact():
    rng = np.random.default_rng(2)
    u = ScalarField(rng.random((5, 7)))
    assert_array_equal(field_from_csv(field_to_csv(u)).data, u.data)


def test_csv_rejects_malformed_input():
    with pytest.raises(FieldFormatError):
        field_from_csv('')
    with pytest.raises(FieldFormatError):
        field_from_csv('2,2\n0.1,0.2\n')
    with pytest.raises(FieldFormatError):
        field_from_csv('1,2\n0.1\n')
    with pytest.raises(FieldFormatError):
        field_from_csv('1,2\n0.1,abc\n')
    with pytest.raises(FieldFormatError):
        field_from_csv('1,1\nnan\n')


def test_pgm_round_trip_for_eight_bit_values():
    levels = np.arange(12, dtype=np.float64).reshape(3, 4) * 20.0 / 255.0
    u = ScalarField(levels, is_mask=True)
    assert_array_equal(field_from_pgm(field_to_pgm(u)).data, u.data)


def test_pgm_reads_ascii_and_comments():
    u = field_from_pgm(b'P2\n# two pixels\n2 1\n255\n0 255\n')
    assert_array_equal(u.data, [[0.0, 1.0]])


def test_pgm_reads_sixteen_bit_samples():
    u = field_from_pgm(b'P5\n1 2\n65535\n\x00\x00\xff\xff')
    assert_array_equal(u.data, [[0.0], [1.0]])


def test_pgm_writer_emits_binary_greymap():
    u = ScalarField(np.array([[0.0, 1.0, 0.5]]), is_mask=True)
    assert field_to_pgm(u) == b'P5\n3 1\n255\n\x00\xff\x80'


def test_pgm_rejects_truncated_data():
    with pytest.raises(FieldFormatError):
        field_from_pgm(b'P5\n2 2\n255\n\x00\x01\x02')
    with pytest.raises(FieldFormatError):
        field_from_pgm(b'P6\n1 1\n255\n\x00')
    with pytest.raises(FieldFormatError):
        field_from_pgm(b'P5\n2 2')
    with pytest.raises(FieldFormatError):
        field_from_pgm(b'not an image')


def test_read_write_field_by_extension(tmp_path):
    u = ScalarField(np.array([[0.0, 1.0], [0.2, 0.8]]), is_mask=True)
    write_field(str(tmp_path / 'u.pgm'), u)
    assert (tmp_path / 'u.pgm').read_bytes().startswith(b'P5')
    assert read_field(str(tmp_path / 'u.pgm')).shape == (2, 2)
    write_field(str(tmp_path / 'u.csv'), u)
    assert_array_equal(read_field(str(tmp_path / 'u.csv')).data, u.data)


def test_sibling_path():
    assert sibling_path('out/report.txt', '_magnitude', 'csv') == 'out/report_magnitude.csv'


# configuration

def test_get_config_defaults_without_file(tmp_path):
    config = get_config(str(tmp_path / 'missing.json'), environ={})
    assert config == DEFAULTS


def test_get_config_merges_file_and_environment(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'losses': {'delta': 0.01}, 'cgpm': {'eta': 0.2}, 'bogus': {'x': 1}}))
    environ = {
        'CONVEX_PRIOR_CGPM_ETA': '0.5',
        'CONVEX_PRIOR_CGPM_CHAIN_RULE': 'false',
        'CONVEX_PRIOR_IO_GAMMAS': '0.1,0.9',
        'CONVEX_PRIOR_MIDPOINT_T_MAX': 'many',
    }
    config = get_config(str(path), environ=environ)
    assert config['losses']['delta'] == 0.01
    assert config['cgpm']['eta'] == 0.5
    assert config['cgpm']['chain_rule'] is False
    assert config['io']['gammas'] == [0.1, 0.9]
    assert config['midpoint']['t_max'] == DEFAULTS['midpoint']['t_max']
    assert 'bogus' not in config


def test_get_config_sanitizes_out_of_range_values(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'conditions': {'radius': 0.2, 'tolerance': -1.0}, 'cgpm': {'eta': 0.0}}))
    config = get_config(str(path), environ={})
    assert config['conditions']['radius'] == 1.0
    assert config['conditions']['tolerance'] == DEFAULTS['conditions']['tolerance']
    assert config['cgpm']['eta'] == DEFAULTS['cgpm']['eta']


def test_build_run_config_applies_shared_flags(tmp_path):
    args = build_parser().parse_args(
        ['cgpm', '--input', 'mask.csv', '--radius', '3', '--loss', '1st', '--compat-no-chain']
    )
    run = build_run_config(args, get_config(str(tmp_path / 'missing.json'), environ={}))
    assert run.condition.radius == 3.0
    assert run.loss.radius == 3.0
    assert run.midpoint_radius == 3.0
    assert run.cgpm.loss_kind is LossKind.FIRST_ORDER
    assert run.cgpm.chain_rule is False
    assert run.lam_explicit is False
    assert run.gammas == (0.25, 0.5, 0.75)
    assert run.condition.mixed_stencil == 'composite'
    assert run.condition.gradient == 'central'
    assert run.cgpm.project is True


def test_build_run_config_projection_and_gradient_flags(tmp_path):
    args = build_parser().parse_args(
        ['cgpm', '--input', 'mask.csv', '--no-project', '--projection-levels', '64',
         '--first-order-gradient', 'forward', '--mixed-stencil', 'compat']
    )
    run = build_run_config(args, get_config(str(tmp_path / 'missing.json'), environ={}))
    assert run.cgpm.project is False
    assert run.cgpm.projection_levels == 64
    assert run.condition.gradient == 'forward'
    assert run.condition.mixed_stencil == 'compat'
    assert run.loss.mixed_stencil == 'compat'


def test_help_states_axis_convention():
    assert 'row index is x, column index is y' in build_parser().format_help()


def test_build_run_config_requires_input(tmp_path):
    args = build_parser().parse_args(['check'])
    with pytest.raises(InvalidArgumentError):
        build_run_config(args, get_config(str(tmp_path / 'missing.json'), environ={}))


def test_parse_gamma_list():
    assert parse_gamma_list('0.25, 0.5') == [0.25, 0.5]
    with pytest.raises(InvalidArgumentError):
        parse_gamma_list('0.5,high')
    with pytest.raises(InvalidArgumentError):
        parse_gamma_list(',')


# command line

def test_check_passes_on_paraboloid(tmp_path, config_file, capsys):
    path = _paraboloid_csv(tmp_path)
    report = str(tmp_path / 'report.txt')
    code = main(['check', '--input', path, '--order', '2', '--output', report, '--config', config_file])
    assert code == 0
    assert 'result=pass' in capsys.readouterr().out
    assert os.path.exists(report)
    assert os.path.exists(str(tmp_path / 'report_magnitude.csv'))


def test_check_zero_order_disk_passes_and_star_fails(tmp_path, config_file, capsys):
    disk = _write_shape(tmp_path, 'disk')
    star = _write_shape(tmp_path, 'star')
    assert main(['check', '--input', disk, '--order', '0', '--config', config_file]) == 0
    assert main(['check', '--input', star, '--order', '0', '--config', config_file]) == 1
    assert 'result=violated' in capsys.readouterr().out


def test_loss_writes_per_pixel_field(tmp_path, config_file, capsys):
    star = _write_shape(tmp_path, 'star')
    out = str(tmp_path / 'per_pixel.csv')
    assert main(['loss', '--input', star, '--loss', '2nd', '--output', out, '--config', config_file]) == 0
    assert 'loss=2nd' in capsys.readouterr().out
    assert read_field(out).shape == (64, 64)


@pytest.mark.parametrize('loss', ['1st', '2nd'])
def test_gradcheck_passes(config_file, capsys, loss):
    assert main(['gradcheck', '--loss', loss, '--seed', '0', '--size', '8', '--config', config_file]) == 0
    out = capsys.readouterr().out
    assert 'result=pass' in out
    assert 'max_pointwise_error=' in out
    assert 'finite-difference noise' in out


def test_gradcheck_rejects_tiny_field(config_file):
    assert main(['gradcheck', '--size', '3', '--config', config_file]) == 2


def test_convexify_commands_write_outputs(tmp_path, config_file):
    star = _write_shape(tmp_path, 'star')
    out0 = str(tmp_path / 'star_c0.csv')
    assert main(['convexify0', '--input', star, '--output', out0, '--config', config_file]) == 0
    assert os.path.exists(str(tmp_path / 'star_c0_iterations.csv'))
    assert np.all(read_field(out0).data >= read_field(star).data - 1e-15)

    out1 = str(tmp_path / 'star_cgpm.csv')
    assert main(['cgpm', '--input', star, '--output', out1, '--t-max', '3', '--config', config_file]) == 0
    header = (tmp_path / 'star_cgpm_iterations.csv').read_text().splitlines()[0]
    assert header == 'iteration,objective,loss'


def test_demo_writes_result_files(tmp_path, config_file, capsys):
    outdir = tmp_path / 'demo'
    code = main(['demo', '--shape', 'star', '--size', '64', '--method', 'convexify0',
                 '--outdir', str(outdir), '--config', config_file])
    assert code == 0
    for name in ('before.csv', 'after.csv', 'iterations.csv', 'metrics.csv', 'summary.txt'):
        assert (outdir / name).exists(), name
    summary = (outdir / 'summary.txt').read_text()
    assert 'dice=' in summary and 'components_after=' in summary
    assert 'shape=star' in capsys.readouterr().out


def test_usage_and_io_errors_exit_two(tmp_path, config_file):
    truncated = tmp_path / 'bad.csv'
    truncated.write_text('3,3\n0.1,0.2,0.3\n')
    assert main(['check', '--input', str(truncated), '--config', config_file]) == 2
    assert main(['check', '--input', str(tmp_path / 'missing.csv'), '--config', config_file]) == 2
    out_of_range = tmp_path / 'range.csv'
    out_of_range.write_text('1,2\n0.5,2.0\n')
    assert main(['check', '--input', str(out_of_range), '--config', config_file]) == 2
    assert main(['loss', '--input', str(out_of_range), '--config', config_file]) == 2
    assert main(['check', '--config', config_file]) == 2
    assert main(['demo', '--config', config_file]) == 2
    assert main(['unknown']) == 2


def test_demo_keeps_two_disks_apart(tmp_path, config_file):
    outdir = tmp_path / 'two'
    code = main(['demo', '--shape', 'two_disks', '--size', '64', '--method', 'convexify0',
                 '--radius', '2', '--outdir', str(outdir), '--config', config_file])
    assert code == 0
    summary = (outdir / 'summary.txt').read_text().splitlines()
    assert 'components_before=2' in summary
    assert 'components_after=2' in summary


def test_commands_are_deterministic(tmp_path, config_file):
    star = _write_shape(tmp_path, 'star')
    outputs = []
    for run in ('a', 'b'):
        report = str(tmp_path / f'report_{run}.txt')
        cgpm_out = str(tmp_path / f'cgpm_{run}.csv')
        main(['check', '--input', star, '--order', '1', '--output', report, '--config', config_file])
        main(['cgpm', '--input', star, '--output', cgpm_out, '--t-max', '3', '--config', config_file])
        outputs.append([
            (tmp_path / f'report_{run}.txt').read_bytes(),
            (tmp_path / f'report_{run}_magnitude.csv').read_bytes(),
            (tmp_path / f'cgpm_{run}.csv').read_bytes(),
            (tmp_path / f'cgpm_{run}_iterations.csv').read_bytes(),
        ])
    assert outputs[0] == outputs[1]


def test_cgpm_accepts_out_of_range_logits(tmp_path, config_file, capsys):
    logits = tmp_path / 'logits.csv'
    write_field(str(logits), ScalarField(np.linspace(-6.0, 6.0, 64).reshape(8, 8)))
    out = str(tmp_path / 'from_logits.csv')
    assert main(['cgpm', '--input', str(logits), '--logits', '--output', out, '--t-max', '2',
                 '--config', config_file]) == 0
    assert 'projection_change=' in capsys.readouterr().out
    assert read_field(out).as_mask().shape == (8, 8)


def test_demo_and_gradcheck_are_deterministic(tmp_path, config_file, capsys):
    outputs = []
    for run in ('a', 'b'):
        outdir = tmp_path / f'demo_{run}'
        main(['demo', '--shape', 'crescent', '--size', '64', '--method', 'cgpm-2nd', '--t-max', '5',
              '--outdir', str(outdir), '--config', config_file])
        report = tmp_path / f'gradcheck_{run}.txt'
        main(['gradcheck', '--loss', '1st', '--seed', '3', '--size', '8', '--output', str(report),
              '--config', config_file])
        files = [(outdir / name).read_bytes()
                 for name in ('before.csv', 'after.csv', 'iterations.csv', 'metrics.csv', 'summary.txt')]
        outputs.append(files + [report.read_bytes()])
    assert outputs[0] == outputs[1]
    capsys.readouterr()
