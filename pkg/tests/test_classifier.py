import json
import socket
import socketserver
import threading

import numpy as np
import pytest

from roufalsify.classifier import (
    Box,
    LabeledSet,
    RemoteClassifier,
    SyntheticClassifier,
    TransportError,
    error_rate,
    false_negatives,
    false_positives,
)

PLANTED = Box(lo=(0.4, 0.0, 0.15), hi=(0.5, 1.0, 0.25))


def test_constant_classifier():
    clf = SyntheticClassifier(arity=3, base_label=1)
    assert clf.classify([0.1, 0.9, 0.5]).label == 1
    assert clf.classify([0.0, 0.0, 0.0]).label == 1


def test_planted_box_flips_label():
    clf = SyntheticClassifier(arity=3, base_label=1, boxes=[PLANTED])
    assert clf.classify([0.45, 0.2, 0.2]).label == 0
    assert clf.classify([0.9, 0.2, 0.2]).label == 1


def test_classify_is_deterministic():
    clf = SyntheticClassifier(arity=3, base_label=1, boxes=[PLANTED])
    x = np.array([0.42, 0.7, 0.21])
    first = clf.classify(x)
    for _ in range(5):
        again = clf.classify(x)
        assert again == first


def test_score_in_range():
    clf = SyntheticClassifier(arity=3, base_label=1, boxes=[PLANTED])
    rng = np.random.default_rng(1)
    for x in rng.random((50, 3)):
        v = clf.classify(x)
        assert 0.5 <= v.score <= 1.0


def test_arity_mismatch_rejected():
    clf = SyntheticClassifier(arity=3, base_label=1)
    with pytest.raises(ValueError):
        clf.classify([0.1, 0.2])


def make_set(labels):
    rng = np.random.default_rng(0)
    return LabeledSet(points=rng.random((len(labels), 2)), labels=np.array(labels))


def test_perfect_agreement_counts():
    clf = SyntheticClassifier(arity=2, base_label=1)
    ts = make_set([1] * 10)
    assert false_positives(clf, ts) == 0
    assert false_negatives(clf, ts) == 0
    assert error_rate(clf, ts) == 0.0


def test_constant_one_classifier_counts():
    clf = SyntheticClassifier(arity=2, base_label=1)
    ts = make_set([0, 0, 0] + [1] * 7)
    assert false_positives(clf, ts) == 3
    assert false_negatives(clf, ts) == 0
    clf0 = SyntheticClassifier(arity=2, base_label=0)
    assert false_positives(clf0, ts) == 0
    assert false_negatives(clf0, ts) == 7


def test_error_rate_arithmetic():
    clf = SyntheticClassifier(arity=2, base_label=1)
    ts = make_set([0, 0] + [1] * 8)
    assert error_rate(clf, ts) == pytest.approx(0.2)


def test_always_wrong_has_complement_error():
    ts = make_set([0, 1, 1, 0, 1, 1, 1, 0, 0, 1])
    f = SyntheticClassifier(arity=2, base_label=1)
    flipped = SyntheticClassifier(arity=2, base_label=0)
    assert error_rate(f, ts) + error_rate(flipped, ts) == pytest.approx(1.0)


def test_empty_test_set_rejected():
    clf = SyntheticClassifier(arity=2, base_label=1)
    ts = LabeledSet(points=np.empty((0, 2)), labels=np.empty(0, dtype=int))
    with pytest.raises(ValueError):
        error_rate(clf, ts)


# --- remote handle against a minimal in-test protocol server -------------------


class _EchoRuleHandler(socketserver.StreamRequestHandler):
    def handle(self):
        clf = SyntheticClassifier(arity=3, base_label=1, boxes=[PLANTED])
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            try:
                req = json.loads(line)
                verdict = clf.classify(req["features"])
                reply = {"id": req["id"], "label": verdict.label, "score": verdict.score}
            except Exception:
                reply = {"id": 0, "error": "malformed request"}
            if self.server.scramble_ids:
                reply["id"] = 777
            self.wfile.write((json.dumps(reply) + "\n").encode("utf-8"))
            self.wfile.flush()


class _Server(socketserver.TCPServer):
    allow_reuse_address = True
    scramble_ids = False


@pytest.fixture()
def proto_server():
    server = _Server(("127.0.0.1", 0), _EchoRuleHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()


def test_remote_matches_local_rule(proto_server):
    port = proto_server.server_address[1]
    local = SyntheticClassifier(arity=3, base_label=1, boxes=[PLANTED])
    rng = np.random.default_rng(2)
    with RemoteClassifier("127.0.0.1", port, timeout=5.0, arity=3) as remote:
        for x in rng.random((40, 3)):
            assert remote.classify(x).label == local.classify(x).label


def test_remote_id_mismatch_is_transport_error(proto_server):
    proto_server.scramble_ids = True
    port = proto_server.server_address[1]
    with RemoteClassifier("127.0.0.1", port, timeout=5.0) as remote:
        with pytest.raises(TransportError):
            remote.classify([0.1, 0.2, 0.3])


def test_remote_connection_refused():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        free_port = probe.getsockname()[1]
    remote = RemoteClassifier("127.0.0.1", free_port, timeout=0.5)
    with pytest.raises(TransportError):
        remote.classify([0.1, 0.2, 0.3])


def test_metric_transport_error_reports_item(proto_server):
    proto_server.scramble_ids = True
    port = proto_server.server_address[1]
    ts = make_set([1, 1, 1])
    ts = LabeledSet(points=np.random.default_rng(0).random((3, 3)), labels=np.array([1, 1, 1]))
    with RemoteClassifier("127.0.0.1", port, timeout=5.0) as remote:
        with pytest.raises(TransportError) as info:
            false_positives(remote, ts)
        assert info.value.item_index == 0
