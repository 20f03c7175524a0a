"""Unit tests for the OpenQASM 2 parser and emitter."""
import math

import numpy as np
import pytest

from peepopt.circuits import Circuit, GateKind, cx, rz
from peepopt.qasm import (
    QasmParseError,
    QasmRangeError,
    UnsupportedGateError,
    emit_qasm,
    parse_document,
    parse_qasm,
)
from conftest import FIXTURE_FILES, random_circuit

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


class TestParse:
    def test_single_rx(self):
        circ = parse_qasm(HEADER + "qreg q[1]; rx(pi) q[0];")
        assert len(circ) == 1
        assert circ.gates[0].kind is GateKind.RX
        assert circ.gates[0].params == (math.pi,)

    def test_cx(self):
        circ = parse_qasm(HEADER + "qreg q[2]; cx q[0],q[1];")
        assert circ.gates == (cx(0, 1),)

    def test_u_is_u3_alias(self):
        circ = parse_qasm(HEADER + "qreg q[1]; u(0.1,0.2,0.3) q[0];")
        assert circ.gates[0].kind is GateKind.U3
        assert circ.gates[0].params == (0.1, 0.2, 0.3)

    def test_pi_arithmetic(self):
        circ = parse_qasm(
            HEADER + "qreg q[1]; rz(pi/2) q[0]; rz(3*pi/4) q[0]; rz(-pi) q[0];"
            " rz(2e-3) q[0]; rz((pi+1)/2) q[0];"
        )
        angles = [g.params[0] for g in circ.gates]
        assert angles == pytest.approx(
            [math.pi / 2, 3 * math.pi / 4, -math.pi, 2e-3, (math.pi + 1) / 2]
        )

    def test_comments_and_whitespace(self):
        circ = parse_qasm(
            "OPENQASM 2.0; // header\nqreg q[2];\n// full line comment\n"
            "cx q[0],\n   q[1];  barrier q;\n"
        )
        assert circ.gates == (cx(0, 1),)

    def test_measure_recorded_and_stripped(self):
        doc = parse_document(
            HEADER + "qreg q[2]; creg c[2]; cx q[0],q[1]; measure q[0] -> c[0];"
            " measure q[1] -> c[1];"
        )
        assert len(doc.circuit) == 1
        assert doc.measurements == [(0, "c", 0), (1, "c", 1)]

    def test_full_register_measure(self):
        doc = parse_document(HEADER + "qreg q[3]; creg c[3]; measure q -> c;")
        assert doc.measurements == [(0, "c", 0), (1, "c", 1), (2, "c", 2)]


class TestDiagnostics:
    def test_unsupported_gate_named_with_line(self):
        with pytest.raises(UnsupportedGateError) as exc:
            parse_qasm(HEADER + "qreg q[3];\nccx q[0],q[1],q[2];")
        assert exc.value.gate_name == "ccx"
        assert exc.value.line == 4  # two header lines precede the qreg

    def test_index_out_of_range(self):
        with pytest.raises(QasmRangeError):
            parse_qasm(HEADER + "qreg q[2]; cx q[0],q[5];")

    def test_missing_semicolon(self):
        with pytest.raises(QasmParseError):
            parse_qasm(HEADER + "qreg q[1]; rx(pi) q[0]")

    def test_bad_expression(self):
        with pytest.raises(QasmParseError):
            parse_qasm(HEADER + "qreg q[1]; rx(pi+*2) q[0];")

    def test_gate_before_qreg(self):
        with pytest.raises(QasmParseError):
            parse_qasm(HEADER + "rx(1) q[0];")

    def test_no_qreg(self):
        with pytest.raises(QasmParseError):
            parse_qasm(HEADER)

    def test_wrong_version(self):
        with pytest.raises(QasmParseError):
            parse_qasm("OPENQASM 3.0;\nqreg q[1];")

    def test_parser_total_on_garbage(self):
        for text in ("", "@@@;", "\x00\x01;", "qreg;", "rx() ;", "((((;"):
            with pytest.raises(QasmParseError):
                parse_qasm(text)


class TestEmit:
    def test_empty_circuit(self):
        out = emit_qasm(Circuit(2))
        assert out == HEADER + "qreg q[2];\n"

    def test_single_rz(self):
        out = emit_qasm(Circuit(1, (rz(0.25, 0),)))
        assert "rz(0.25) q[0];" in out

    def test_round_trip_random(self):
        rng = np.random.default_rng(42)
        circ = random_circuit(rng, 4, 50)
        assert parse_qasm(emit_qasm(circ)) == circ

    @pytest.mark.parametrize("path", FIXTURE_FILES, ids=lambda p: p.stem)
    def test_round_trip_fixtures(self, path):
        circ = parse_qasm(path.read_text())
        assert parse_qasm(emit_qasm(circ)) == circ
