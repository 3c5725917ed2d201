import numpy as np
import pytest

from dqe.services.augment import apply_pipeline, get_transform_factory
from dqe.services.augment.transform_factory import transform_artifact, transform_intensity, transform_spatial
from dqe.services.exceptions import InvalidConfigError
from dqe.services.models.augment_models import (
    ALL_TRANSFORMS, ARTIFACT_TRANSFORMS, INTENSITY_TRANSFORMS, AugmentConfig
)


NEUTRAL_PARAMS = {
    'flip': {'horizontal': False, 'vertical': False},
    'affine': {'rotation': 0.0, 'scale': 1.0, 'translation': (0.0, 0.0)},
    'elastic': {'grid_spacing': 8.0, 'sigma': 0.0},
    'gaussian_noise': {'std': 0.0},
    'contrast': {'factor': 1.0},
    'brightness': {'shift': 0.0},
    'gamma': {'gamma': 1.0},
    'low_resolution': {'factor': 1.0},
    'rician_noise': {'std': 0.0},
    'motion': {'displacement': (0.0, 0.0), 'weight': 0.0},
    'ghosting': {'count': 2, 'intensity': 0.0, 'axis': 0},
    'spikes': {'intensity': 0.0, 'position': (0.3, 0.6)},
    'bias_field': {'order': 2, 'magnitude': 0.0},
}


def always(name: str) -> AugmentConfig:
    """Config that applies only `name`, every time"""
    config = AugmentConfig.disabled(seed=3)
    setattr(config, f"p_{name}", 1.0)
    return config


def test_every_transform_has_neutral_params():
    assert set(NEUTRAL_PARAMS) == set(ALL_TRANSFORMS)


def test_disabled_pipeline_is_identity(axial_stack):
    out = apply_pipeline(axial_stack, AugmentConfig.disabled(), draw=5)
    assert np.array_equal(out.channels, axial_stack.channels)


@pytest.mark.parametrize('name', ALL_TRANSFORMS)
def test_neutral_params_are_identity(name, axial_stack):
    transform = get_transform_factory().create_transform(name, AugmentConfig())
    out = transform.apply(axial_stack, NEUTRAL_PARAMS[name], np.random.default_rng(0))
    assert np.array_equal(out.channels, axial_stack.channels)


@pytest.mark.parametrize('name', ALL_TRANSFORMS)
def test_fixed_seed_is_deterministic(name, axial_stack):
    config = always(name)
    first = apply_pipeline(axial_stack, config, draw=11)
    second = apply_pipeline(axial_stack, config, draw=11)
    assert np.array_equal(first.channels, second.channels)


@pytest.mark.parametrize('name', INTENSITY_TRANSFORMS + ARTIFACT_TRANSFORMS)
def test_labels_untouched(name, axial_stack):
    config = always(name)
    for seed in range(10):
        out = apply_pipeline(axial_stack, config, draw=seed)
        assert np.array_equal(out.labels, axial_stack.labels)


def test_spatial_transforms_keep_label_values(axial_stack):
    config = AugmentConfig(p_flip=1.0, p_affine=1.0, p_elastic=1.0)
    for seed in range(10):
        out = transform_spatial(axial_stack, 'elastic', draw=seed, config=config)
        assert set(np.unique(out.labels)) <= {0.0, 1.0}


def test_full_pipeline_stays_finite(axial_stack):
    config = AugmentConfig(**{f"p_{name}": 1.0 for name in ALL_TRANSFORMS})
    rng = np.random.default_rng(0)
    for _ in range(1000):
        out = apply_pipeline(axial_stack, config, draw=rng)
        assert np.all(np.isfinite(out.channels))
        assert out.channels.shape == axial_stack.channels.shape


def test_flip_is_exact(axial_stack):
    out = transform_spatial(axial_stack, 'flip', {'horizontal': True, 'vertical': False})
    assert np.array_equal(out.channels, axial_stack.channels[:, :, ::-1])


def test_kind_is_enforced(axial_stack):
    with pytest.raises(InvalidConfigError):
        transform_intensity(axial_stack, 'flip')
    with pytest.raises(InvalidConfigError):
        transform_artifact(axial_stack, 'gamma')


def test_invalid_params(axial_stack):
    with pytest.raises(InvalidConfigError):
        transform_intensity(axial_stack, 'gamma', {'gamma': -1.0})
    with pytest.raises(InvalidConfigError):
        transform_artifact(axial_stack, 'bias_field', {'order': 0, 'magnitude': 0.1})


def test_unknown_config_key():
    with pytest.raises(InvalidConfigError):
        AugmentConfig.from_dict({'p_teleport': 1.0})


def test_flip_twice_is_identity(axial_stack):
    params = {'horizontal': True, 'vertical': True}
    once = transform_spatial(axial_stack, 'flip', params)
    assert not np.array_equal(once.channels, axial_stack.channels)
    twice = transform_spatial(once, 'flip', params)
    assert np.array_equal(twice.channels, axial_stack.channels)


@pytest.mark.parametrize('name', ['affine', 'elastic'])
def test_identity_spatial_params(name, axial_stack):
    out = transform_spatial(axial_stack, name, NEUTRAL_PARAMS[name], draw=4)
    assert np.array_equal(out.channels, axial_stack.channels)


def test_affine_labels_stay_binary(axial_stack):
    params = {'rotation': 12.0, 'scale': 1.1, 'translation': (0.05, -0.05)}
    out = transform_spatial(axial_stack, 'affine', params)
    assert set(np.unique(out.labels)) <= {0.0, 1.0}
    assert not np.array_equal(out.mr, axial_stack.mr)


def test_label_nesting_survives_spatial_and_motion(axial_stack):
    # brats channels: enhancing tumor within tumor core within whole tumor
    config = AugmentConfig(p_flip=1.0, p_affine=1.0, p_elastic=1.0, elastic_sigma=(1.0, 3.0))
    motion = {'displacement': (2.0, -3.0), 'weight': 0.8}
    for seed in range(10):
        out = apply_pipeline(axial_stack, config, draw=seed)
        out = transform_artifact(out, 'motion', motion)
        enhancing, core, whole = out.labels.astype(bool)
        assert not np.any(enhancing & ~core)
        assert not np.any(core & ~whole)


def test_dominant_motion_moves_labels(axial_stack):
    moved = transform_artifact(axial_stack, 'motion', {'displacement': (3.0, 0.0), 'weight': 0.8})
    assert not np.array_equal(moved.labels, axial_stack.labels)
    assert moved.labels.sum() > 0


def test_bias_field_is_positive_and_shared(axial_stack):
    out = transform_artifact(axial_stack, 'bias_field', {'order': 3, 'magnitude': 0.3}, draw=1)
    inside = axial_stack.mr > 0.1
    ratio = out.mr[inside] / axial_stack.mr[inside]
    assert np.all(ratio > 0)
    per_channel = [np.divide(out.mr[c], axial_stack.mr[c], where=inside[c], out=np.zeros_like(out.mr[c]))
                   for c in range(axial_stack.mr.shape[0])]
    common = inside.all(axis=0)
    assert np.allclose(per_channel[0][common], per_channel[1][common], rtol=1e-4)


def test_ghosting_keeps_shape_and_labels(axial_stack):
    out = transform_artifact(axial_stack, 'ghosting', {'count': 3, 'intensity': 0.5, 'axis': 1})
    assert out.channels.shape == axial_stack.channels.shape
    assert np.array_equal(out.labels, axial_stack.labels)
    assert not np.allclose(out.mr, axial_stack.mr)


def test_bias_order_must_be_positive():
    with pytest.raises(InvalidConfigError):
        AugmentConfig(bias_order=0)
