import pytest

from construal_sim.worlds import GridObject, GridWorld, Obstacle, PlinkoWorld, validate_grid, validate_plinko


def rect(x0, y0, x1, y1):
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


def plinko(obstacles, ball=(300.0, 60.0), buckets=5, teleporters=()):
    return validate_plinko(
        PlinkoWorld(600.0, 600.0, ball, 10.0, 580.0, buckets, tuple(obstacles), tuple(teleporters))
    )


def chute_world():
    """Ball drops onto a roof inside a two-wall chute; the roof cannot change the bucket."""
    return plinko([
        Obstacle("wall_l", rect(225, 100, 240, 580)),
        Obstacle("wall_r", rect(360, 100, 375, 580)),
        Obstacle("target", ((300, 300), (330, 330), (270, 330))),
    ])


def splitter_world():
    """A splitter sends the ball either way; a ramp catches the right-hand branch."""
    return plinko([
        Obstacle("splitter", ((300, 150), (330, 180), (270, 180))),
        Obstacle("target", ((330, 230), (550, 340), (330, 340))),
    ])


def box_world(top=400.0):
    return plinko([Obstacle("box", rect(200, top, 400, top + 100))], ball=(300.0, 60.0))


def wall_grid():
    """5x5 grid with a vertical wall between start and goal, gap at the bottom."""
    return validate_grid(GridWorld(5, 5, (0, 2), (4, 2), (GridObject("wall", ((2, 0), (2, 1), (2, 2), (2, 3))),)))


@pytest.fixture
def chute():
    return chute_world()


@pytest.fixture
def splitter():
    return splitter_world()


ACCEPTANCE_LINES: list[str] = []


def report(n, ok, detail=""):
    """Record a PASS/FAIL line for an acceptance criterion, then assert it."""
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").split("(")[0])):
            terminalreporter.write_line(line)
