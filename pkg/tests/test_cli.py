import json

from dmkf.fixtures import fixture_text


def test_validate_clean_fixture(cli, paths):
    code, out, _ = cli("validate", "--plan", paths["wagga"])
    assert code == 0
    assert out.strip() == "0 errors, 0 warnings"


def test_validate_broken_plan_exits_one(cli, tmp_path):
    bad = tmp_path / "bad.dmp"
    bad.write_text(
        'plan "t" as P { phase Response { role R "r" '
        '{ responsibility "x" for Ghost } } }'
    )
    code, out, _ = cli("validate", "--plan", str(bad))
    assert code == 1
    assert "R3 error" in out
    assert out.strip().endswith("1 errors, 0 warnings")


def test_parse_emits_json(cli, paths):
    code, out, _ = cli("parse", "--plan", paths["gundagai"])
    assert code == 0
    tree = json.loads(out)
    assert tree["plan_id"] == "GundagaiLFP"
    assert tree["phases"]["Preparedness"]["agents"][0]["activities"][0]["activity_id"] == (
        "CommunityFloodTalks"
    )


def test_parse_error_reports_all_problems(cli, tmp_path):
    bad = tmp_path / "bad.dmp"
    bad.write_text('plan "t" as P { phase Response { role R } }')
    code, _, err = cli("parse", "--plan", str(bad))
    assert code == 1
    assert err.startswith("PlanParseError:")


def test_registry_check_reports_counts(cli, paths):
    code, out, _ = cli("registry-check", "--registry", paths["registry-full92"])
    assert code == 0
    assert out.strip() == (
        "ok: 92 concepts (Prevention=21 Preparedness=25 Response=25 Recovery=21)"
    )


def test_registry_check_names_phase_and_counts_on_mismatch(cli, tmp_path):
    lines = fixture_text("registry-full92").splitlines()
    removed = next(i for i, l in enumerate(lines) if "phase Response" in l)
    broken = tmp_path / "broken.dmm"
    broken.write_text("\n".join(lines[:removed] + lines[removed + 1 :]))
    code, _, err = cli("registry-check", "--registry", str(broken))
    assert code == 1
    assert "Response: declared 25, found 24" in err


def test_candidates_lists_names_in_order(cli, paths):
    code, out, _ = cli(
        "candidates",
        "--registry", paths["registry-extract"],
        "--plan", paths["wagga"],
        "--element", "WaggaWaggaLFP/Preparedness/role/FPCs",
    )
    assert code == 0
    assert out == "AidAgency\nPeople\nPreparednessTeam\n"


def test_candidates_ranked_orders_by_score(cli, paths):
    code, out, _ = cli(
        "candidates",
        "--registry", paths["registry-extract"],
        "--plan", paths["wagga"],
        "--element", "WaggaWaggaLFP/Preparedness/role/FPCs",
        "--ranked",
    )
    assert code == 0
    lines = [line.split("\t") for line in out.splitlines()]
    assert lines[0][0] == "People"
    scores = [float(score) for _, score in lines]
    assert scores == sorted(scores, reverse=True)


def test_unknown_element_exits_three(cli, paths):
    code, _, err = cli(
        "candidates",
        "--registry", paths["registry-extract"],
        "--plan", paths["wagga"],
        "--element", "WaggaWaggaLFP/Preparedness/role/Nobody",
    )
    assert code == 3
    assert err.startswith("UnknownElement:")


def test_missing_required_flag_is_usage_error(cli, paths):
    code, _, err = cli("candidates", "--plan", paths["wagga"], "--element", "x/y")
    assert code == 2
    assert err.startswith("UsageError:")


def test_missing_file_is_io_error(cli):
    code, _, err = cli("validate", "--plan", "/nonexistent/plan.dmp")
    assert code == 3
    assert err.startswith("IOError:")


def test_rules_table_output(cli):
    code, out, _ = cli("rules")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 9
    assert lines[0].startswith("R1\terror\t")
    assert lines[8].startswith("R9\twarning\t")


def test_map_batch_transfer_query_flow(cli, paths, tmp_path):
    snapshot = str(tmp_path / "snap.dmr")
    code, out, _ = cli(
        "map-batch",
        "--registry", paths["registry-extract"],
        "--plan", paths["wagga"],
        "--snapshot", snapshot,
        "--at", "2026-01-01T00:00:00Z",
        paths["wagga-roles-map"],
    )
    assert code == 0
    assert out.strip().endswith("8 mappings recorded")

    code, out, _ = cli(
        "transfer",
        "--registry", paths["registry-extract"],
        "--plan", paths["wagga"],
        "--snapshot", snapshot,
    )
    assert code == 0
    assert "8 units" in out

    code, out, _ = cli("query", "--snapshot", snapshot, "--concept", "PreparednessTeam")
    assert code == 0
    assert len(out.splitlines()) == 7

    code, out, _ = cli("query", "--snapshot", snapshot, "--concept", "People")
    assert code == 0
    assert out.splitlines()[0].split("\t")[0] == "WaggaWaggaLFP/Preparedness/role/FPCs"


def test_map_batch_rejects_candidate_violation(cli, paths, tmp_path):
    bad_map = tmp_path / "bad.map"
    bad_map.write_text(
        'map WaggaWaggaLFP/Preparedness/role/FPCs -> Training by "p"\n'
    )
    code, _, err = cli(
        "map-batch",
        "--registry", paths["registry-extract"],
        "--plan", paths["wagga"],
        "--snapshot", str(tmp_path / "s.dmr"),
        str(bad_map),
    )
    assert code == 3
    assert err.startswith("CandidateViolation:")


def test_export_round_trips_through_cli(cli, paths, tmp_path):
    snapshot = str(tmp_path / "snap.dmr")
    cli(
        "map-batch",
        "--registry", paths["registry-extract"],
        "--plan", paths["edges"],
        "--snapshot", snapshot,
        "--at", "2026-01-01T00:00:00Z",
        paths["edges-map"],
    )
    cli(
        "transfer",
        "--registry", paths["registry-extract"],
        "--plan", paths["edges"],
        "--snapshot", snapshot,
    )
    code, exported, _ = cli("export", "--snapshot", snapshot)
    assert code == 0
    copy = tmp_path / "copy.dmr"
    copy.write_text(exported)
    code, reexported, _ = cli("export", "--snapshot", str(copy))
    assert code == 0
    assert reexported == exported


def test_edge_queries_via_cli(cli, paths, tmp_path):
    snapshot = str(tmp_path / "snap.dmr")
    cli(
        "map-batch",
        "--registry", paths["registry-extract"],
        "--plan", paths["edges"],
        "--snapshot", snapshot,
        "--at", "2026-01-01T00:00:00Z",
        paths["edges-map"],
    )
    cli(
        "transfer",
        "--registry", paths["registry-extract"],
        "--plan", paths["edges"],
        "--snapshot", snapshot,
    )
    code, out, _ = cli("query", "--snapshot", snapshot, "--relation", "isControlledBy")
    assert code == 0
    assert len(out.splitlines()) == 2
    assert all("isControlledBy" in line for line in out.splitlines())


def test_fixtures_listing(cli):
    code, out, _ = cli("fixtures")
    assert code == 0
    assert any(line.startswith("wagga\t") for line in out.splitlines())
    code, out, _ = cli("fixtures", "wagga")
    assert code == 0
    assert out.strip().endswith("wagga.dmp")


def test_registry_mismatch_is_a_soft_gate(cli, paths, tmp_path):
    snapshot = str(tmp_path / "snap.dmr")
    code, _, _ = cli(
        "map-batch",
        "--registry", paths["registry-extract"],
        "--plan", paths["wagga"],
        "--snapshot", snapshot,
        paths["wagga-roles-map"],
    )
    assert code == 0
    code, _, err = cli(
        "map-batch",
        "--registry", paths["registry-full92"],
        "--plan", paths["wagga"],
        "--snapshot", snapshot,
        paths["wagga-full-map"],
    )
    assert code == 3
    assert err.startswith("RegistryMismatch:")
    code, out, _ = cli(
        "map-batch",
        "--registry", paths["registry-full92"],
        "--plan", paths["wagga"],
        "--snapshot", snapshot,
        "--force-registry",
        paths["wagga-full-map"],
    )
    assert code == 0
    assert out.strip().endswith("50 mappings recorded")


def test_console_script_entry_point(paths):
    import subprocess

    proc = subprocess.run(
        ["dmkf", "validate", "--plan", paths["wagga"]],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0 errors, 0 warnings"


def test_render_emits_canonical_form_that_reparses(cli, paths, tmp_path):
    code, rendered, _ = cli("render", "--plan", paths["wagga"])
    assert code == 0
    canonical = tmp_path / "canonical.dmp"
    canonical.write_text(rendered)
    code, rerendered, _ = cli("render", "--plan", str(canonical))
    assert code == 0
    assert rerendered == rendered
    assert "SESLC peer WWCC" in rendered
