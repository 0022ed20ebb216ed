import json
import pytest

from src.wildbps.main import main


def run(capsys, *argv):
    code = main(list(argv) + ["--no-cache"])
    out, err = capsys.readouterr()
    return code, out, err


class TestComputeZ:
    def test_refined(self, capsys):
        """精细化管线输出截断级数文档"""
        code, out, _ = run(capsys, "compute-z", "--g", "1", "--n", "3,4", "--l", "1,1", "--rmax", "1")
        assert code == 0
        doc = json.loads(out)
        assert doc["engine"] == "wildbps"
        assert doc["variables"] == ["q", "y"]
        assert doc["shape"] == [1, 1]
        assert doc["terms"][0]["exponents"] == [[0], [0]]
        assert len(doc["terms"]) == 2

    def test_gw_requires_equal_n(self, capsys):
        """n_a 不相等时 gw 管线退出码为 2"""
        code, out, err = run(capsys, "compute-z", "--pipeline", "gw", "--n", "3,4", "--rmax", "1")
        assert code == 2
        assert out == ""
        assert '"error_code":"precondition"' in err

    def test_both_pipelines(self, capsys):
        """both 输出两个文档"""
        code, out, _ = run(capsys, "compute-z", "--pipeline", "both", "--n", "2,2", "--rmax", "1")
        assert code == 0
        docs = json.loads(out)
        assert isinstance(docs, list) and len(docs) == 2

    def test_output_file(self, capsys, tmp_path):
        """--output 写入文件"""
        target = tmp_path / "z.json"
        code, out, _ = run(capsys, "compute-z", "--pipeline", "hmw", "--n", "2", "--rmax", "1",
                           "--output", str(target))
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text(encoding="utf-8"))["variables"] == ["z", "w"]


class TestExtractBps:
    def test_single_box(self, capsys):
        """r = 1，g = 1：P = 1 − 2uv + u²v²"""
        code, out, _ = run(capsys, "extract-bps", "--g", "1", "--n", "2,3", "--mu", "[1],[1]")
        assert code == 0
        doc = json.loads(out)
        assert doc["d"] == 2
        assert doc["terms"] == [[0, 0, "1"], [1, 1, "-2"], [2, 2, "1"]]
        assert doc["checks_failed"] == 0
        assert doc["config"]["l"] == [1, 1]

    def test_output_independent_of_threads(self, capsys):
        """不同线程数的输出逐字节相同"""
        argv = ["extract-bps", "--g", "1", "--n", "2,3", "--mu", "[1,1],[2]", "--l", "2,1"]
        code_one, one, _ = run(capsys, *argv, "--threads", "1")
        code_many, many, _ = run(capsys, *argv, "--threads", "3")
        assert code_one == code_many == 0
        assert one == many
        assert "threads" not in json.loads(one)["config"]

    def test_invalid_mu(self, capsys):
        """|μ_a| 不相等时配置无效"""
        code, out, err = run(capsys, "extract-bps", "--n", "2,3", "--mu", "[2],[1]")
        assert code == 2
        assert '"error_code":"usage"' in err

    def test_unknown_command(self, capsys):
        """未知子命令"""
        assert main(["frobnicate"]) == 2


class TestCompareHmw:
    def test_equal(self, capsys):
        """r = 1 时两条管线一致"""
        code, out, _ = run(capsys, "compare-hmw", "--g", "1", "--n", "2,3", "--mu", "[1],[1]")
        assert code == 0
        assert json.loads(out)["verdict"] == "equal"

    def test_perturb(self, capsys):
        """扰动 ℍ 后报告差异"""
        code, out, _ = run(capsys, "compare-hmw", "--g", "1", "--n", "2,3", "--mu", "[1],[1]", "--perturb")
        assert code == 0
        verdict = json.loads(out)
        assert verdict["verdict"] == "diff"
        assert len(verdict["diff"]) == 1

    def test_requires_columns(self, capsys):
        """μ_a 不是 (1^r)"""
        code, _, err = run(capsys, "compare-hmw", "--n", "2,3", "--mu", "[2],[2]")
        assert code == 2


class TestSelftestAndGolden:
    @pytest.mark.slow
    def test_selftest(self, capsys):
        """small 网格全部通过"""
        code, out, _ = run(capsys, "selftest")
        assert code == 0
        report = json.loads(out)
        assert report["passed"], [r for r in report["results"] if not r["passed"]]

    @pytest.mark.slow
    def test_golden(self, capsys, golden_path):
        """example1 与 golden 文件逐项一致"""
        code, out, _ = run(capsys, "golden", str(golden_path("example1.json")))
        assert code == 0
        verdict = json.loads(out)
        assert verdict["verdict"] == "equal"
        assert verdict["diff"] == []
        failed = [c for c in verdict["checks"] if not c["passed"] and not c["informational"]]
        assert failed == []
