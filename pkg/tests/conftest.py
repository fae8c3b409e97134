import numpy as np
import pytest

from botsentinel.corpus import UserHistory


def history(times, texts=None, label=None, user_id="u"):
    times = list(times)
    if texts is None:
        texts = ["x"] * len(times)
    return UserHistory(user_id, np.asarray(times, dtype=np.int64), tuple(texts), label)


@pytest.fixture
def make_history():
    return history
