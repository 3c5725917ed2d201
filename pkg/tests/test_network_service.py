import pytest
import torch

from dqe.services.exceptions import InvalidConfigError, InvalidSelectionError
from dqe.services.models.run_models import SweepSelection
from dqe.services.models.train_models import Architecture, OptimizerType, TrainConfig
from dqe.services.models.volume_models import LabelEncoding, Normalization
from dqe.services.network_service import build_model, count_parameters, gradient_check, hyperparameter_grid
from dqe.services.optimizers import get_optimizer_factory

from conftest import tiny_train_config


class TestGrid:
    def test_default_grid(self):
        grid = hyperparameter_grid()
        assert len(grid) == 2 * 3 * 2 * 2
        assert len({config.tag for config in grid}) == len(grid)
        assert Architecture.DENSE_TINY not in {config.arch for config in grid}

    def test_order_and_base(self):
        base = tiny_train_config(epochs=7)
        grid = hyperparameter_grid({'optimizer': ['sgd_momentum', 'adamw'], 'encoding': ['single']}, base)
        assert [c.optimizer for c in grid] == [OptimizerType.SGD_MOMENTUM, OptimizerType.ADAMW]
        assert all(c.encoding is LabelEncoding.SINGLE for c in grid)
        assert all(c.arch is Architecture.DENSE_TINY and c.epochs == 7 for c in grid)

    def test_selection_object(self):
        selection = SweepSelection(arch=['dense_tiny'], optimizer=['adamw'], normalization=['minmax'],
                                   encoding=['brats', 'single'])
        grid = hyperparameter_grid(selection, tiny_train_config())
        assert [c.tag for c in grid] == ['dense_tiny-adamw-minmax-brats', 'dense_tiny-adamw-minmax-single']

    @pytest.mark.parametrize('selection', [
        {'arch': ['resnet50']},
        {'optimizer': []},
        {'learning_rate': [0.1]},
    ])
    def test_invalid_selection(self, selection):
        with pytest.raises(InvalidSelectionError):
            hyperparameter_grid(selection, tiny_train_config())


class TestModel:
    @pytest.mark.parametrize('encoding, channels', [('single', 5), ('brats', 7)])
    def test_output_shape(self, encoding, channels):
        config = tiny_train_config(encoding=encoding)
        model = build_model(config).eval()
        assert config.in_channels == channels
        with torch.no_grad():
            out = model(torch.rand(3, channels, 16, 16))
        assert out.shape == (3,)

    def test_seeded_initialization(self):
        first = build_model(tiny_train_config(seed=4)).state_dict()
        second = build_model(tiny_train_config(seed=4)).state_dict()
        assert all(torch.equal(first[k], second[k]) for k in first)

    def test_build_leaves_global_rng_alone(self):
        torch.manual_seed(123)
        expected = torch.rand(3)
        torch.manual_seed(123)
        build_model(tiny_train_config(seed=4))
        assert torch.equal(torch.rand(3), expected)

    def test_densenet_backbones_are_larger(self):
        tiny = count_parameters(build_model(tiny_train_config()))
        dense121 = count_parameters(build_model(TrainConfig(input_size=(64, 64))))
        assert dense121 > 100 * tiny

    def test_input_below_minimum(self):
        with pytest.raises(InvalidConfigError):
            TrainConfig(arch='dense121', input_size=(32, 32))

    def test_build_model_rejects_other_configs(self):
        with pytest.raises(InvalidConfigError):
            build_model({'arch': 'dense121'})


def test_gradient_check_tiny_model():
    torch.manual_seed(0)
    config = tiny_train_config(normalization=Normalization.MINMAX)
    model = build_model(config)
    inputs = torch.rand(2, config.in_channels, 16, 16)
    targets = torch.tensor([1.5, 4.5])
    assert gradient_check(model, inputs, targets, n_params=100, step=1e-6) <= 1e-4


@pytest.mark.parametrize('optimizer', list(OptimizerType))
def test_optimizers_reduce_loss(optimizer):
    torch.manual_seed(0)
    weight = torch.nn.Parameter(torch.tensor([3.0, -2.0]))
    opt = get_optimizer_factory().create_optimizer(optimizer, [weight], 0.05, total_iterations=200)
    start = float((weight ** 2).sum())
    for _ in range(200):
        opt.zero_grad()
        loss = (weight ** 2).sum()
        loss.backward()
        opt.step()
    assert float((weight ** 2).sum()) < start
