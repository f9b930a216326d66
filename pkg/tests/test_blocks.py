import pytest

from entromax.blocks import (
    ROLE_MAIN,
    ROLE_SE,
    ROLE_SHORTCUT,
    BlockKind,
    block_convs,
)


def shapes(plans):
    return [(p.c_in, p.c_out, p.kernel, p.groups, p.stride, p.role) for p in plans]


def test_plain_block_is_one_conv():
    plans = block_convs(BlockKind.plain(), 8, 8, 3, 1, 1)
    assert shapes(plans) == [(8, 8, 3, 1, 1, ROLE_MAIN)]


def test_basic_block_identity_shortcut_needs_no_conv():
    plans = block_convs(BlockKind.resnet_basic(), 64, 64, 3, 1, 1)
    assert shapes(plans) == [
        (64, 64, 3, 1, 1, ROLE_MAIN),
        (64, 64, 3, 1, 1, ROLE_MAIN),
    ]


def test_basic_block_projection_on_shape_change():
    plans = block_convs(BlockKind.resnet_basic(), 64, 128, 3, 1, 2)
    assert shapes(plans) == [
        (64, 128, 3, 1, 2, ROLE_MAIN),
        (128, 128, 3, 1, 1, ROLE_MAIN),
        (64, 128, 1, 1, 2, ROLE_SHORTCUT),
    ]


def test_bottleneck_inner_width_and_stride_on_spatial_conv():
    plans = block_convs(BlockKind.resnet_bottleneck(), 256, 512, 3, 1, 2)
    assert shapes(plans) == [
        (256, 128, 1, 1, 1, ROLE_MAIN),
        (128, 128, 3, 1, 2, ROLE_MAIN),
        (128, 512, 1, 1, 1, ROLE_MAIN),
        (256, 512, 1, 1, 2, ROLE_SHORTCUT),
    ]


def test_mobilenet_block_hand_expansion():
    # expansion 6 on 16 input channels: 1x1 expand to 96, depthwise 3x3 on
    # all 96 channels, linear 1x1 project to 24
    plans = block_convs(BlockKind.mobilenet_v2(expansion=6), 16, 24, 3, 1, 1)
    assert shapes(plans) == [
        (16, 96, 1, 1, 1, ROLE_MAIN),
        (96, 96, 3, 96, 1, ROLE_MAIN),
        (96, 24, 1, 1, 1, ROLE_MAIN),
    ]


def test_mobilenet_expansion_one_skips_expand_conv():
    plans = block_convs(BlockKind.mobilenet_v2(expansion=1), 32, 16, 3, 1, 1)
    assert shapes(plans) == [
        (32, 32, 3, 32, 1, ROLE_MAIN),
        (32, 16, 1, 1, 1, ROLE_MAIN),
    ]


def test_mobilenet_se_convs_reduce_from_block_input():
    plans = block_convs(BlockKind.mobilenet_v2(expansion=6, se_reduction=4),
                        16, 24, 3, 1, 1)
    assert shapes(plans) == [
        (16, 96, 1, 1, 1, ROLE_MAIN),
        (96, 96, 3, 96, 1, ROLE_MAIN),
        (96, 4, 1, 1, 1, ROLE_SE),   # max(1, 16 // 4)
        (4, 96, 1, 1, 1, ROLE_SE),
        (96, 24, 1, 1, 1, ROLE_MAIN),
    ]
    se = [p for p in plans if p.role == ROLE_SE]
    assert all(p.has_bias and not p.has_bn for p in se)


def test_exact_mode_rejects_fractional_channels():
    with pytest.raises(ValueError):
        block_convs(BlockKind.resnet_bottleneck(), 64, 10, 3, 1, 1)  # 2.5 inner


def test_relaxed_mode_allows_fractional_channels():
    plans = block_convs(BlockKind.resnet_bottleneck(), 64.0, 10.0, 3, 1, 1,
                        exact=False)
    assert plans[0].c_out == pytest.approx(2.5)


def test_structure_errors():
    assert BlockKind(kind="nope").structure_errors()
    assert BlockKind.mobilenet_v2(expansion=-1).structure_errors()
    assert BlockKind.mobilenet_v2(se_reduction=0.5).structure_errors()
    assert not BlockKind.resnet_bottleneck().structure_errors()
