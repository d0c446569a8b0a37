import json

import pytest
from typer.testing import CliRunner

from pascalis.cli import EXIT_INPUT, EXIT_NOT_VERIFIED, EXIT_OK, EXIT_RESOURCE, app
from pascalis.mapfile import read_map
from pascalis.polymap import compose

runner = CliRunner()

NOT_AUTOMORPHISM = "vars: x y\nx + y^2\ny + x^2\n"


def run(*args, stdin=None, env=None):
    return runner.invoke(app, list(args), input=stdin, env=env)


def run_json(*args, **kwargs):
    result = run(*args, **kwargs)
    assert result.exit_code == EXIT_OK, result.output
    return json.loads(result.stdout)


# ==================== analyze ====================

def test_analyze_nagata_report():
    data = run_json("analyze", "builtin:nagata", "--jobs", "1", "--no-timings")
    assert list(data) == ["schema", "map_name", "n", "field", "keller", "normal_form", "pascal",
                          "inverse", "nilpotency", "bounds", "timings_ms"]
    assert data["schema"] == "pascalis-report/1"
    assert data["map_name"] == "nagata"
    assert data["keller"] == {"status": "yes", "constant": "1", "determinant": None}
    assert data["normal_form"]["d"] == 3 and data["normal_form"]["D"] == 5
    assert data["pascal"]["outcome"] == "finite"
    assert data["pascal"]["index"] == 3
    assert data["pascal"]["per_component_indices"] == [3, 2, 1]
    assert data["inverse"]["verified"] is True
    assert data["inverse"]["method"] == "criterion"
    assert data["nilpotency"]["strongly_nilpotent"] is False
    assert data["bounds"]["deg_bound_n_minus_1"] == "ok"
    assert set(data["timings_ms"].values()) == {0}


def test_analyze_output_is_byte_stable():
    args = ("analyze", "builtin:simple_triangular", "--jobs", "1", "--no-timings")
    first = run(*args)
    second = run(*args)
    assert first.exit_code == EXIT_OK
    assert first.stdout == second.stdout


def test_default_analyze_runs_are_byte_identical():
    args = ("analyze", "builtin:simple_triangular", "--jobs", "1")
    first = run(*args)
    second = run(*args)
    assert first.exit_code == EXIT_OK
    assert first.stdout == second.stdout
    assert set(json.loads(first.stdout)["timings_ms"].values()) == {0}


def test_analyze_truncate_sets_first_certificate_truncation():
    fib = "builtin:fibonacci_affine(0, 0)"
    data = run_json("analyze", fib, "--m-max", "6", "--truncate", "3", "--jobs", "1")
    assert data["pascal"]["outcome"] == "not_within_bound"
    assert data["pascal"]["probe_truncation"] == 3
    assert [s["k"] for s in data["pascal"]["probe_evidence"]] == list(range(7))

    exact = run_json("analyze", fib, "--m-max", "6", "--truncate", "unbounded", "--jobs", "1")
    assert exact["pascal"]["outcome"] == "not_within_bound"
    assert exact["pascal"]["probe_truncation"] is None
    assert exact["pascal"]["probe_evidence"] == []
    assert exact["pascal"]["exact_steps"] == 6

    assert run("analyze", fib, "--truncate", "0").exit_code == EXIT_INPUT


def test_analyze_seed_drives_sampled_nilpotency_points():
    for seed in ("0", "5"):
        data = run_json("analyze", "builtin:simple_triangular", "--seed", seed, "--jobs", "1")
        assert data["nilpotency"]["sample_seed"] == int(seed)
        assert data["nilpotency"]["sampled_product_zero"] is True


def test_analyze_text_format():
    result = run("analyze", "builtin:nagata", "--format", "text", "--jobs", "1")
    assert result.exit_code == EXIT_OK
    assert "[Pascal sequence]" in result.stdout
    assert "Pascal finite, index 3" in result.stdout


def test_analyze_over_prime_field():
    data = run_json("analyze", "builtin:simple_triangular", "--field", "gf:3", "--no-timings",
                    "--jobs", "1")
    assert data["field"] == "GF(3)"
    assert data["inverse"]["verified"] is True
    assert data["nilpotency"]["finite_field_caveat"] is True


def test_analyze_singular_linear_part_skips_later_stages():
    data = run_json("analyze", "-", "--no-timings", stdin="vars: x y\nx^2\ny\n")
    assert data["map_name"] == "stdin"
    assert data["keller"]["status"] == "no"
    assert data["normal_form"]["status"] == "failed"
    assert data["pascal"]["status"] == "skipped"


def test_verbose_progress_goes_to_stderr():
    result = run("analyze", "builtin:simple_triangular", "-v", "--jobs", "1")
    assert result.exit_code == EXIT_OK
    assert "[Analyze]" in result.stderr
    assert "[Analyze]" not in result.stdout


# ==================== invert ====================

def test_invert_identity():
    result = run("invert", "builtin:identity(3)")
    assert result.exit_code == EXIT_OK
    mf = read_map(result.stdout)
    assert mf.name == "identity(3)_inverse"
    assert mf.map.is_identity()


def test_invert_affine_map_undoes_normalisation():
    result = run("invert", "builtin:fibonacci_affine(1, 2)")
    assert result.exit_code == EXIT_OK
    inverse = read_map(result.stdout).map
    f = read_map("vars: x1 x2\n2*x1 + x2 + 1\nx1 + x2 + 2\n").map
    assert compose(inverse, f).is_identity()
    assert compose(f, inverse).is_identity()


def test_invert_nagata_round_trip(tmp_path):
    result = run("invert", "builtin:nagata", "--jobs", "1")
    assert result.exit_code == EXIT_OK
    path = tmp_path / "nagata_inverse.map"
    path.write_text(result.stdout, encoding="utf-8")
    composed = run("compose", "builtin:nagata", str(path))
    assert composed.exit_code == EXIT_OK
    mf = read_map(composed.stdout)
    assert mf.name == "nagata_o_nagata_inverse"
    assert mf.map.is_identity()


def test_invert_unverified_candidate_exits_3():
    result = run("invert", "-", "--jobs", "1", stdin=NOT_AUTOMORPHISM)
    assert result.exit_code == EXIT_NOT_VERIFIED
    assert "# verified: false" in result.stdout
    assert "verification" in result.stderr


def test_invert_singular_linear_part_is_an_input_error():
    result = run("invert", "-", stdin="vars: x y\nx^2\ny\n")
    assert result.exit_code == EXIT_INPUT


# ==================== pascal ====================

def test_pascal_gh_composition_is_certified_by_probe():
    data = run_json("pascal", "builtin:gh_composition", "--m-max", "10", "--term-ceiling", "5000",
                    "--jobs", "1")
    assert data["map_name"] == "gh_composition"
    assert data["outcome"] == "not_within_bound"
    assert data["index"] is None
    assert data["probe_truncation"] >= 15
    assert data["evidence"][0]["k"] == 0
    assert data["probe_evidence"][-1]["k"] == 10
    assert data["probe_evidence"][-1]["term_count"] > 0


def test_pascal_truncated_tableau():
    data = run_json("pascal", "builtin:nagata", "--truncate", "4", "--jobs", "1")
    assert data["truncation"] == 4
    assert data["reached_zero"] is True
    assert data["index"] <= 3
    assert data["steps"][0]["degrees"] == [1, 1, 1]


def test_pascal_unbounded_truncation_is_the_exact_check():
    data = run_json("pascal", "builtin:nagata", "--truncate", "unbounded", "--jobs", "1")
    assert data["outcome"] == "finite"
    assert data["index"] == 3


def test_pascal_config_file_caps_m_max(tmp_path):
    config = tmp_path / "pascalis.yaml"
    config.write_text("pascal:\n  m_max_cap: 20\n", encoding="utf-8")
    data = run_json("pascal", "builtin:fibonacci_affine", "--jobs", "1", "--config", str(config))
    assert data["m_max"] == 20
    assert data["outcome"] == "not_within_bound"


def test_pascal_text_format():
    result = run("pascal", "builtin:simple_triangular", "--format", "text", "--jobs", "1")
    assert result.exit_code == EXIT_OK
    assert "outcome: finite" in result.stdout
    assert "index: 2" in result.stdout


# ==================== nilpotent / keller ====================

def test_nilpotent_vasyunin():
    data = run_json("nilpotent", "builtin:vasyunin")
    assert data["nilpotent"] is True
    assert data["index"] == 5
    assert data["strongly_nilpotent"] is False
    assert "numeric_product" not in data


def test_nilpotent_numeric_vectors():
    data = run_json("nilpotent", "builtin:vasyunin", "--vectors", "1,0,0,0,0;0,1,0,0,0")
    product = data["numeric_product"]
    assert product[1][1] == "1"
    assert product[2][2] == "-1"


@pytest.mark.parametrize("vectors", ["1,0", "1,0,0,0,x", "1,0,0,0,1/0"])
def test_nilpotent_rejects_bad_vectors(vectors):
    result = run("nilpotent", "builtin:vasyunin", "--vectors", vectors)
    assert result.exit_code == EXIT_INPUT


def test_keller():
    assert run_json("keller", "builtin:nagata")["status"] == "yes"
    data = run_json("keller", "-", stdin="vars: x y\nx^2\ny\n")
    assert data["status"] == "no"
    assert data["determinant"] == "2*x"


# ==================== compose / iterate ====================

def test_iterate():
    result = run("iterate", "builtin:simple_triangular", "3")
    assert result.exit_code == EXIT_OK
    mf = read_map(result.stdout)
    assert mf.name == "simple_triangular_iterate_3"
    assert result.stdout.splitlines()[-2] == "3*x2^2 + x1"
    zero = run("iterate", "builtin:nagata", "0")
    assert read_map(zero.stdout).map.is_identity()


def test_compose_with_truncation():
    result = run("compose", "builtin:nagata", "builtin:nagata", "--truncate", "3")
    assert result.exit_code == EXIT_OK
    assert read_map(result.stdout).map.degree() <= 3


# ==================== corpus ====================

def test_corpus_lists_builtins():
    data = run_json("corpus")
    names = [entry["name"] for entry in data["builtins"]]
    assert len(names) == 7
    nagata = data["builtins"][names.index("nagata")]
    assert nagata["pascal_index"] == 3
    assert nagata["degree"] == 5
    vasyunin = data["builtins"][names.index("vasyunin")]
    assert vasyunin["inverse_known"] is True
    assert vasyunin["pascal_index"] == "not_within_bound"


def test_corpus_text_listing():
    result = run("corpus", "--format", "text")
    assert result.exit_code == EXIT_OK
    assert any(line.startswith("nagata: ") for line in result.stdout.splitlines())


def test_corpus_generation_is_seeded():
    first = run("corpus", "--generate", "triangular", "--n", "4", "--seed", "7")
    second = run("corpus", "--generate", "triangular", "--n", "4", "--seed", "7")
    assert first.exit_code == EXIT_OK
    assert first.stdout == second.stdout
    mf = read_map(first.stdout)
    assert mf.map.n == 4
    assert mf.name == "random_triangular(n=4, max_deg=3, seed=7)"


def test_corpus_tame_generation():
    result = run("corpus", "--generate", "tame", "--n", "2", "--factors", "2", "--seed", "1")
    assert result.exit_code == EXIT_OK
    mf = read_map(result.stdout)
    assert len(mf.metadata["factors"].split()) == 2
    assert run("corpus", "--generate", "tame", "--n", "1").exit_code == EXIT_INPUT


# ==================== exit codes ====================

@pytest.mark.parametrize("args, stdin", [
    (["analyze", "builtin:no_such_map"], None),
    (["analyze", "builtin:nagata", "--field", "gf:4"], None),
    (["pascal", "builtin:nagata", "--m-max", "0"], None),
    (["pascal", "builtin:nagata", "--truncate", "lots"], None),
    (["analyze", "/nonexistent/f.map"], None),
    (["analyze", "builtin:nagata", "--no-such-flag"], None),
    (["analyze"], None),
    (["keller", "-"], "vars: x y\nx + \ny\n"),
    (["corpus", "--n", "0"], None),
])
def test_input_errors_exit_1(args, stdin):
    result = run(*args, stdin=stdin)
    assert result.exit_code == EXIT_INPUT, result.output


def test_malformed_config_file_exits_1(tmp_path):
    config = tmp_path / "broken.yaml"
    config.write_text("pascal: [1, 2\n", encoding="utf-8")
    assert run("keller", "builtin:nagata", "--config", str(config)).exit_code == EXIT_INPUT


def test_term_ceiling_exits_2():
    result = run("pascal", "builtin:nagata", "--term-ceiling", "3", "--jobs", "1")
    assert result.exit_code == EXIT_RESOURCE
    assert "ceiling" in result.stderr


def test_environment_ceiling_and_flag_precedence():
    env = {"PASCALIS_TERM_CEILING": "3"}
    assert run("pascal", "builtin:nagata", "--jobs", "1", env=env).exit_code == EXIT_RESOURCE
    flagged = run("pascal", "builtin:nagata", "--jobs", "1", "--term-ceiling", "100000", env=env)
    assert flagged.exit_code == EXIT_OK


def test_invalid_environment_ceiling_exits_1():
    result = run("pascal", "builtin:nagata", env={"PASCALIS_TERM_CEILING": "many"})
    assert result.exit_code == EXIT_INPUT
