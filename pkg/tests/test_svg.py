import numpy as np

from sawkit.svg import Panel, render_panels


def make_panel():
    x = np.linspace(0, 10, 50)
    panel = Panel(title="demo", xlabel="x", ylabel="y")
    panel.add_line(x, np.sin(x), label="signal")
    panel.add_points(x[::10], np.sin(x[::10]), label="samples")
    panel.add_vline(5.0)
    return panel


def test_render_is_deterministic():
    a = render_panels([make_panel()])
    b = render_panels([make_panel()])
    assert a == b


def test_document_structure():
    svg = render_panels([make_panel(), make_panel()], width=500, panel_height=250)
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert 'height="500"' in svg
    assert "demo" in svg and "signal" in svg


def test_degenerate_extents_do_not_crash():
    panel = Panel()
    panel.add_line([1.0, 1.0], [2.0, 2.0])
    svg = render_panels([panel])
    assert "<polyline" in svg
