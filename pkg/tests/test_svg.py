import re

import numpy as np

from lozi.svg import Figure


def test_y_axis_points_up():
    fig = Figure(width=100)
    fig.dots([[0.0, 0.0], [0.0, 1.0]])
    svg = fig.render(timestamp=False)
    ys = [float(v) for v in re.findall(r'cy="([-0-9.]+)"', svg)]
    assert ys[1] < ys[0]


def test_viewbox_has_five_percent_margin():
    fig = Figure(width=110)
    fig.dots([[0.0, 0.0], [1.0, 1.0]])
    svg = fig.render(timestamp=False)
    assert 'viewBox="0 0 110 110"' in svg
    xs = [float(v) for v in re.findall(r'cx="([-0-9.]+)"', svg)]
    assert np.allclose(xs, [5.0, 105.0])


def test_timestamp_is_optional_and_only_difference():
    fig = Figure()
    fig.polygon([[0, 0], [1, 0], [0, 1]])
    with_ts, without = fig.render(True), fig.render(False)
    assert "<!-- generated" in with_ts and "generated" not in without
    assert re.sub(r"<!-- generated .* -->\n", "", with_ts) == without
