import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypar.commcost import (PAIR_FACTOR, Parallelism, inter_backward_elements,
                            inter_cost, inter_elements, inter_forward_elements,
                            intra_cost, plan_cost)
from hypar.errors import ValidationError
from hypar.netspec import infer_shapes, parse_model
from support import random_shapes

DP, MP = Parallelism.DP, Parallelism.MP

FC_SHAPES = infer_shapes(parse_model("name t\nbatch 32\ninput 1 1 70\nfc 100\n"))
CONV_SHAPES = infer_shapes(parse_model(
    "name t\nbatch 32\ninput 12 12 20\nconv 50 k5 s1 p0\n"))


def test_fc_intra_bytes_match_worked_example():
    dp = intra_cost(FC_SHAPES, 0, DP)
    mp = intra_cost(FC_SHAPES, 0, MP)
    assert (dp.elements, dp.bytes) == (7000, 56_000)
    assert (mp.elements, mp.bytes) == (3200, 25_600)


def test_conv_intra_bytes_match_worked_example():
    dp = intra_cost(CONV_SHAPES, 0, DP)
    mp = intra_cost(CONV_SHAPES, 0, MP)
    assert (dp.elements, dp.bytes) == (25_000, 200_000)
    assert (mp.elements, mp.bytes) == (102_400, 819_200)


def test_pair_factor_in_byte_accounting():
    cost = intra_cost(FC_SHAPES, 0, DP)
    assert cost.bytes == cost.elements * FC_SHAPES.precision_bytes * PAIR_FACTOR


def test_layer_index_out_of_range():
    with pytest.raises(ValidationError):
        intra_cost(FC_SHAPES, 1, DP)
    with pytest.raises(ValidationError):
        inter_cost(FC_SHAPES, 0, DP, DP)


# --- quadrant overlap oracle -------------------------------------------------
#
# Boundary tensors are 2-D grids (batch rows x feature columns). A layer
# holds tensors in its layout: dp keeps a row half; an mp consumer keeps a
# column half of its input; an mp producer ends up with a full copy of its
# output after the partial-sum exchange. Counting the cells one peer must
# fetch remotely (needed minus held) on a toy 4x4 grid reproduces the
# transition fractions.

def _cells(rows, cols):
    return {(r, c) for r in rows for c in cols}


def _quadrant_fetch(prev, nxt, n=4):
    rows_half, cols_half = range(n // 2), range(n // 2)
    full_r, full_c = range(n), range(n)
    # feature map: produced by prev, consumed by next
    f_held = _cells(rows_half, full_c) if prev is DP else _cells(full_r, full_c)
    f_needed = _cells(rows_half, full_c) if nxt is DP else _cells(full_r, cols_half)
    # error: produced by next, consumed by prev
    e_held = _cells(rows_half, full_c) if nxt is DP else _cells(full_r, cols_half)
    e_needed = _cells(rows_half, full_c) if prev is DP else _cells(full_r, full_c)
    return len(f_needed - f_held) + len(e_needed - e_held)


def test_transition_fractions_match_quadrant_enumeration():
    # 4x4 toy boundary: 16 elements
    toy = infer_shapes(parse_model("name t\nbatch 4\ninput 1 1 4\nfc 4\nfc 4\n"))
    assert toy[0].elems_output == 16
    for prev, nxt in itertools.product((DP, MP), repeat=2):
        assert inter_elements(toy, 1, prev, nxt) == _quadrant_fetch(prev, nxt)


def test_boundary_3200_examples():
    shapes = infer_shapes(parse_model(
        "name t\nbatch 32\ninput 1 1 70\nfc 100\nfc 100\n"))
    assert shapes[0].elems_output == 3200
    assert inter_cost(shapes, 1, DP, DP).elements == 0
    assert inter_cost(shapes, 1, DP, MP).elements == 1600
    assert inter_cost(shapes, 1, MP, DP).elements == 1600
    assert inter_cost(shapes, 1, MP, MP).elements == 1600


@given(st.randoms(use_true_random=False))
@settings(max_examples=80, deadline=None)
def test_transition_equalities_hold_for_random_shapes(rnd):
    shapes = random_shapes(random.Random(rnd.randint(0, 2**31)), max_layers=4)
    for l in range(1, len(shapes)):
        dd = inter_elements(shapes, l, DP, DP)
        dm = inter_elements(shapes, l, DP, MP)
        mm = inter_elements(shapes, l, MP, MP)
        md = inter_elements(shapes, l, MP, DP)
        assert dd == 0
        # quarter+quarter of equal F/E tensors equals half of one of them,
        # including odd sizes under the joint ceiling
        assert dm == mm == md
        fwd = inter_forward_elements(shapes, l, DP, MP)
        bwd = inter_backward_elements(shapes, l, DP, MP)
        assert fwd + bwd == dm and fwd >= 0 and bwd >= 0


def test_batch_scaling_moves_mp_but_not_dp():
    base = infer_shapes(parse_model("name t\nbatch 8\ninput 1 1 70\nfc 100\n"))
    scaled = infer_shapes(parse_model("name t\nbatch 24\ninput 1 1 70\nfc 100\n"))
    assert intra_cost(base, 0, DP).elements == intra_cost(scaled, 0, DP).elements
    assert intra_cost(scaled, 0, MP).elements == 3 * intra_cost(base, 0, MP).elements


def test_plan_cost_single_layer():
    cost = plan_cost(FC_SHAPES, [DP])
    assert cost.elements == 7000


def test_plan_cost_two_layer_all_dp_has_no_inter_term():
    shapes = infer_shapes(parse_model(
        "name t\nbatch 4\ninput 1 1 6\nfc 8\nfc 3\n"))
    expected = shapes[0].elems_weight + shapes[1].elems_weight
    assert plan_cost(shapes, [DP, DP]).elements == expected


def test_plan_cost_length_mismatch():
    with pytest.raises(ValidationError):
        plan_cost(FC_SHAPES, [DP, DP])


def test_inference_all_dp_is_free_and_optimal():
    rng = random.Random(7)
    for _ in range(25):
        shapes = random_shapes(rng, max_layers=5)
        all_dp = [DP] * len(shapes)
        assert plan_cost(shapes, all_dp, training=False).elements == 0
        for plan in itertools.product((DP, MP), repeat=len(shapes)):
            assert plan_cost(shapes, plan, training=False).elements >= 0
