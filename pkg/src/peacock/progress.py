import sys

from tqdm import tqdm


class non_idle_tqdm:
    """Progress bar that silently turns itself off inside IDLE, where tqdm output garbles the shell."""

    def __init__(self, iterable, *args, **kwargs):
        self.iterable = iterable
        self.args = args
        self.kwargs = kwargs
        if 'idlelib.run' not in sys.modules:
            self.tqdm = tqdm
        else:
            self.tqdm = None

    def __iter__(self):
        if self.tqdm is not None:
            return iter(self.tqdm(self.iterable, *self.args, **self.kwargs))
        else:
            return iter(self.iterable)


class no_tqdm:
    def __init__(self, iterable, *args, **kwargs):
        self.iterable = iterable

    def __iter__(self):
        return iter(self.iterable)


def progressbar(iterable, enabled=False, **kwargs):
    """Wrap ``iterable`` in a progress bar if ``enabled``, otherwise iterate it plainly.

    Keyword arguments are passed on to :class:`tqdm.tqdm` (e.g. ``desc``, ``total``).
    """
    if enabled:
        return non_idle_tqdm(iterable, **kwargs)
    return no_tqdm(iterable)
