import io
import json

import pytest

from cascadekit import ingest

# Seven-message worked example: one reply tree rooted at M2 with replies
# M3 (to M2), M5 (to M3) and M7 (a self-reply by M2's author); M1, M4 and
# M6 receive and send no replies.
SAMPLE_RECORDS = [
    {"group_id": "g1", "message_id": "M1", "user_id": "U4", "timestamp": "2018-10-07T15:30:00Z", "kind": "text", "text": "hello", "reply_to": None},
    {"group_id": "g1", "message_id": "M2", "user_id": "U1", "timestamp": "2018-10-07T15:35:00Z", "kind": "text", "text": "big claim", "reply_to": None},
    {"group_id": "g1", "message_id": "M3", "user_id": "U2", "timestamp": "2018-10-07T15:38:00Z", "kind": "text", "text": "really?", "reply_to": "M2"},
    {"group_id": "g1", "message_id": "M4", "user_id": "U5", "timestamp": "2018-10-07T15:40:00Z", "kind": "text", "text": "unrelated", "reply_to": None},
    {"group_id": "g1", "message_id": "M5", "user_id": "U3", "timestamp": "2018-10-07T15:42:00Z", "kind": "text", "text": "source?", "reply_to": "M3"},
    {"group_id": "g1", "message_id": "M6", "user_id": "U6", "timestamp": "2018-10-07T15:45:00Z", "kind": "text", "text": "lunch anyone", "reply_to": None},
    {"group_id": "g1", "message_id": "M7", "user_id": "U1", "timestamp": "2018-10-07T15:50:00Z", "kind": "text", "text": "as I said", "reply_to": "M2"},
]


def sample_jsonl() -> str:
    return "\n".join(json.dumps(r) for r in SAMPLE_RECORDS) + "\n"


@pytest.fixture
def sample_messages() -> list[ingest.Message]:
    messages, warnings = ingest.parse_log(io.StringIO(sample_jsonl()), "jsonl")
    assert not warnings
    return messages
