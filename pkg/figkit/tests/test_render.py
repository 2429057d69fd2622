"""Figure rendering: every layout, overlay markers, determinism, failure
modes, and the command-line entry point."""

import pytest

from figkit import FIGURE_IDS, FigureJob, ManifestError, Style, render
from figkit.cli import main

from conftest import DATA, reseal

# Artist group ids embedded in the SVG output; one load-bearing element
# per panel so layout regressions fail loudly.
MARKERS = {
    "fig1": ["efficiency-curve-b0.5", "efficiency-curve-b2.5"],
    "fig2": ["rate-overlay-g1", "crossover-g3.9"],
    "fig3": ["width-fit-clean_b0", "width-ceiling-g1", "light-cone-g18.4-up"],
    "fig4": ["spectrum-narrow5", "difference-frequency-b2.5-0",
             "eta-bars-site9"],
}


@pytest.mark.parametrize("fid", FIGURE_IDS)
def test_every_layout_renders_from_the_sample_bundles(fid, tmp_path):
    out = render(FigureJob(manifest=DATA / fid, figure=fid,
                           out=tmp_path / f"{fid}.svg"))
    assert out.exists() and out.stat().st_size > 10_000
    text = out.read_text()
    for marker in MARKERS[fid]:
        assert f'id="{marker}"' in text, marker


def test_width_figure_overlays_fit_and_ceiling(tmp_path):
    """The log-log spreading panel carries a fitted power law per series
    plus the uniform-packet saturation line."""
    out = render(FigureJob(manifest=DATA / "fig3", figure="fig3",
                           out=tmp_path / "fig3.svg"))
    text = out.read_text()
    for label in ("clean_b0", "g1", "g18.4"):
        assert f'id="width-fit-{label}"' in text
        assert f'id="width-ceiling-{label}"' in text
        assert f'id="heatmap-{label}"' in text


def test_pdf_output(tmp_path):
    out = render(FigureJob(manifest=DATA / "fig1", figure="fig1",
                           out=tmp_path / "fig1.pdf"))
    assert out.read_bytes()[:5] == b"%PDF-"


@pytest.mark.parametrize("fid", ["fig1", "fig4"])
def test_rendering_is_deterministic(fid, tmp_path):
    first = render(FigureJob(manifest=DATA / fid, figure=fid,
                             out=tmp_path / "a.svg"))
    second = render(FigureJob(manifest=DATA / fid, figure=fid,
                              out=tmp_path / "b.svg"))
    assert first.read_bytes() == second.read_bytes()


def test_style_options_change_the_output(tmp_path):
    plain = render(FigureJob(manifest=DATA / "fig1", figure="fig1",
                             out=tmp_path / "plain.svg"))
    styled = render(FigureJob(manifest=DATA / "fig1", figure="fig1",
                              out=tmp_path / "styled.svg",
                              style=Style(font_size=12.0, line_width=2.0)))
    assert plain.read_bytes() != styled.read_bytes()


def test_empty_table_aborts_before_any_image(fig1_copy, tmp_path):
    name = "efficiency_fig1.csv"
    path = fig1_copy / name
    path.write_text(path.read_text().splitlines()[0] + "\n")
    reseal(fig1_copy, name)
    out = tmp_path / "fig1.svg"
    with pytest.raises(ManifestError, match="contains no data rows"):
        render(FigureJob(manifest=fig1_copy, figure="fig1", out=out))
    assert not out.exists()


def test_corrupted_bundle_aborts_before_any_image(fig1_copy, tmp_path):
    path = fig1_copy / "efficiency_fig1.csv"
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    out = tmp_path / "fig1.svg"
    with pytest.raises(ManifestError, match="checksum mismatch"):
        render(FigureJob(manifest=fig1_copy, figure="fig1", out=out))
    assert not out.exists()


def test_job_rejects_unknown_figure(tmp_path):
    with pytest.raises(ValueError, match="figure must be one of"):
        FigureJob(manifest=DATA / "fig1", figure="fig9",
                  out=tmp_path / "x.svg")


def test_job_rejects_raster_output(tmp_path):
    with pytest.raises(ValueError, match="vector format"):
        FigureJob(manifest=DATA / "fig1", figure="fig1",
                  out=tmp_path / "x.png")


def test_cli_renders_and_reports(tmp_path, capsys):
    out = tmp_path / "fig2.svg"
    rc = main(["render", "--manifest", str(DATA / "fig2"),
               "--figure", "fig2", "--out", str(out)])
    assert rc == 0
    assert out.exists()
    assert f"wrote {out}" in capsys.readouterr().out


def test_cli_style_flags(tmp_path):
    out = tmp_path / "fig1.svg"
    rc = main(["render", "--manifest", str(DATA / "fig1"),
               "--figure", "fig1", "--out", str(out),
               "--font-size", "11", "--cmap", "viridis"])
    assert rc == 0
    assert out.exists()


def test_cli_reports_bundle_errors(tmp_path, capsys):
    rc = main(["render", "--manifest", str(tmp_path / "missing"),
               "--figure", "fig1", "--out", str(tmp_path / "x.svg")])
    assert rc == 1
    assert "error: manifest not found" in capsys.readouterr().err


def test_cli_rejects_unknown_figure(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["render", "--manifest", str(DATA / "fig1"),
              "--figure", "fig9", "--out", str(tmp_path / "x.svg")])
    assert exc.value.code == 2
