import pytest

from mtve.errors import ScenarioError
from mtve.scenario import canonical_text, load_scenario, parse_scenario_text

BASIC = """\
[model]
spacetime = minkowski
dimension = 1
horizon = 1.0
kernel = natural_1d
coupling = 0.5+0.25j

[grid]
time_nodes = 5
space_nodes = 9

[free_field]
factory = plane_wave
wave_vector_1 = 1.0
wave_vector_2 = -2.0

[outputs]
slices = 0.5,0.5; 1.0,0.25
heatmap = yes
"""


def test_parse_basic_scenario():
    scenario = parse_scenario_text(BASIC)
    assert scenario.model.coupling == 0.5 + 0.25j
    assert scenario.model.scale == "none"
    assert scenario.grid.box_half_width == 1.0
    assert scenario.free_field.wave_vector_2 == (-2.0,)
    assert scenario.outputs.slices == ((0.5, 0.5), (1.0, 0.25))
    assert scenario.outputs.heatmap is True
    assert scenario.solver.tol is None


def test_canonical_text_is_stable():
    scenario = parse_scenario_text(BASIC)
    text = canonical_text(scenario)
    again = parse_scenario_text(text)
    assert again == scenario
    assert canonical_text(again) == text


def test_unknown_key_reports_line_and_field():
    text = BASIC.replace("space_nodes = 9", "space_nodes = 9\nresolution = 3")
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text)
    assert info.value.line == 11
    assert info.value.field == "grid.resolution"


def test_unknown_kernel_is_rejected():
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(BASIC.replace("natural_1d", "yukawa"))
    assert info.value.field == "model.kernel"
    assert info.value.line == 5


def test_bad_value_reports_field():
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(BASIC.replace("time_nodes = 5", "time_nodes = five"))
    assert info.value.field == "grid.time_nodes"


def test_missing_key_and_section():
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(BASIC.replace("space_nodes = 9\n", ""))
    assert "space_nodes" in str(info.value)
    with pytest.raises(ScenarioError):
        parse_scenario_text(BASIC.replace("[free_field]", "[freefield]"))


def test_content_before_first_section():
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text("coupling = 1\n" + BASIC)
    assert info.value.line == 1


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "nope.ini")
