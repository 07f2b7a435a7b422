#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Q-functions, the epsilon-greedy policy and the model file format.

Two models share one interface: :class:`DeepQ`, a small feed-forward
network trained with plain stochastic gradient descent, and
:class:`LinearQ`, a lookup table used as a baseline. Both take a batch of
states, targets and masks in ``train_step`` and return the loss measured
before the update.

'''

# IMPORT STANDARD LIBRARIES
import io
import os
import math
import hashlib
import logging
import collections

# IMPORT THIRD-PARTY LIBRARIES
import numpy

# IMPORT LOCAL LIBRARIES
from ..helper import common

_LOGGER = logging.getLogger(__name__)

DEEP = 'deep'
LINEAR = 'linear'
MODEL_KINDS = (DEEP, LINEAR)

HEADER = 'raildq-model'
FORMAT_VERSION = 'v1'

HIDDEN_SIZES = (60, 60)
LEARNING_RATE = 0.01
EPSILON = 1.0
EPSILON_DECAY = 1.00075
EPSILON_FLOOR = 1e-4

_NUMBER_FORMAT = '{:.17g}'


class DimensionError(ValueError):

    '''An input does not have the size a model expects.'''


class NonFiniteLossError(FloatingPointError):

    '''A training step produced a loss or parameter that is not finite.

    Attributes:
        loss (float): The offending loss.

    '''

    def __init__(self, message, loss=float('nan')):
        '''Keep the loss that failed.'''
        super(NonFiniteLossError, self).__init__(message)
        self.loss = loss


def _as_batch(states, size):
    '''Check a state or batch of states against an input size.

    Raises:
        DimensionError: If the last axis does not match.

    Returns:
        tuple[:class:`numpy.ndarray`, bool]: The 2D batch and if the input was a single state.

    '''
    array = numpy.asarray(states, dtype=numpy.float64)
    single = array.ndim == 1
    if single:
        array = array.reshape(1, -1)

    if array.ndim != 2 or array.shape[1] != size:
        raise DimensionError('State shape "{shape}" does not match the model input size "{size}".'
                             ''.format(shape=numpy.shape(states), size=size))

    return array, single


def _masked_loss(outputs, targets, masks):
    '''float: The masked squared error summed per sample and averaged over the batch.'''
    difference = (outputs - targets) * masks
    return float(numpy.sum(difference ** 2) / outputs.shape[0])


class DeepQ(object):

    '''A fully connected network with two rectified hidden layers.

    Attributes:
        sizes (tuple[int]): Input, hidden and output sizes.
        learning_rate (float): The gradient step size.
        weights (list[:class:`numpy.ndarray`]): One (inputs x outputs) matrix per layer.
        biases (list[:class:`numpy.ndarray`]): One vector per layer.

    '''

    kind = DEEP

    def __init__(self, input_size, hidden=HIDDEN_SIZES, outputs=common.ACTION_COUNT,
                 learning_rate=LEARNING_RATE, seed=0):
        '''Create the network with seeded uniform weights.

        Every weight is drawn from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
        Biases start at 0.

        Args:
            input_size (int): The length of an encoded state.
            hidden (:obj:`tuple[int]`, optional): Hidden layer sizes.
            outputs (:obj:`int`, optional): One output per action.
            learning_rate (:obj:`float`, optional): The gradient step size.
            seed (:obj:`int`, optional): Seeds the initial weights.

        '''
        super(DeepQ, self).__init__()
        self.sizes = (int(input_size), ) + tuple(int(size) for size in hidden) + (int(outputs), )
        self.learning_rate = float(learning_rate)

        rng = numpy.random.RandomState(seed)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.sizes, self.sizes[1:]):
            limit = 1.0 / math.sqrt(fan_in)
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(numpy.zeros(fan_out, dtype=numpy.float64))

    @property
    def input_size(self):
        '''int: The length of an encoded state.'''
        return self.sizes[0]

    def parameters(self):
        '''list[:class:`numpy.ndarray`]: W1, b1, W2, b2, W3, b3.'''
        output = []
        for weight, bias in zip(self.weights, self.biases):
            output.extend((weight, bias))
        return output

    def set_parameters(self, parameters):
        '''Replace every weight and bias, in :meth:`parameters` order.

        Raises:
            DimensionError: If a tensor has the wrong shape.

        '''
        current = self.parameters()
        if len(parameters) != len(current):
            raise DimensionError('Expected "{count}" tensors, got "{got}".'
                                 ''.format(count=len(current), got=len(parameters)))

        for old, new in zip(current, parameters):
            if numpy.shape(new) != old.shape:
                raise DimensionError('Tensor shape "{new}" does not match "{old}".'
                                     ''.format(new=numpy.shape(new), old=old.shape))

        values = [numpy.array(item, dtype=numpy.float64) for item in parameters]
        self.weights = values[0::2]
        self.biases = values[1::2]

    def _activations(self, batch):
        '''list[:class:`numpy.ndarray`]: The input followed by every layer output.'''
        activations = [batch]
        last = len(self.weights) - 1
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            value = activations[-1].dot(weight) + bias
            if index != last:
                value = numpy.maximum(value, 0.0)
            activations.append(value)
        return activations

    def forward(self, states):
        '''Evaluate the network.

        Args:
            states (:class:`numpy.ndarray`): One state or a batch of states.

        Raises:
            DimensionError: If the state length does not match the input size.

        Returns:
            :class:`numpy.ndarray`: 5 values, or one row of 5 per state.

        '''
        batch, single = _as_batch(states, self.input_size)
        output = self._activations(batch)[-1]
        if single:
            return output[0]
        return output

    def loss_and_gradients(self, states, targets, masks):
        '''Measure the masked loss and its gradient for every parameter.

        Args:
            states (:class:`numpy.ndarray`): A batch of states.
            targets (:class:`numpy.ndarray`): A batch of 5-value targets.
            masks (:class:`numpy.ndarray`): A batch of 5 flags. Masked-out outputs are ignored.

        Returns:
            tuple[float, list[:class:`numpy.ndarray`]]: The loss and gradients in :meth:`parameters` order.

        '''
        batch, _ = _as_batch(states, self.input_size)
        targets = numpy.asarray(targets, dtype=numpy.float64).reshape(batch.shape[0], -1)
        masks = numpy.asarray(masks, dtype=numpy.float64).reshape(batch.shape[0], -1)

        activations = self._activations(batch)
        outputs = activations[-1]
        loss = _masked_loss(outputs, targets, masks)

        delta = 2.0 * (outputs - targets) * masks / batch.shape[0]
        gradients = []
        for index in reversed(range(len(self.weights))):
            gradients.append(delta.sum(axis=0))
            gradients.append(activations[index].T.dot(delta))
            if index:
                delta = delta.dot(self.weights[index].T) * (activations[index] > 0)

        gradients.reverse()
        return loss, gradients

    def train_step(self, states, targets, masks):
        '''Take one gradient step on the masked mean squared error.

        Raises:
            NonFiniteLossError: If the loss or an updated parameter is not finite.

        Returns:
            float: The loss before the step.

        '''
        loss, gradients = self.loss_and_gradients(states, targets, masks)
        if not math.isfinite(loss):
            raise NonFiniteLossError('Training loss "{loss}" is not finite.'.format(loss=loss), loss)

        updated = [parameter - self.learning_rate * gradient
                   for parameter, gradient in zip(self.parameters(), gradients)]

        if not all(numpy.all(numpy.isfinite(item)) for item in updated):
            raise NonFiniteLossError('A training step produced non-finite parameters at loss '
                                     '"{loss}".'.format(loss=loss), loss)

        self.set_parameters(updated)
        return loss

    def dims(self):
        '''str: The layer sizes joined by "x", as written in model files.'''
        return 'x'.join(str(size) for size in self.sizes)

    def to_lines(self):
        '''list[str]: One line per tensor, row-major.'''
        return [' '.join(_NUMBER_FORMAT.format(value) for value in tensor.ravel())
                for tensor in self.parameters()]

    @classmethod
    def from_lines(cls, dims, lines, learning_rate=LEARNING_RATE):
        '''Rebuild a network from its model file body.'''
        sizes = [int(size) for size in dims.split('x')]
        model = cls(sizes[0], hidden=sizes[1:-1], outputs=sizes[-1], learning_rate=learning_rate)

        tensors = []
        for template, line in zip(model.parameters(), lines):
            values = numpy.array([float(item) for item in line.split()], dtype=numpy.float64)
            if values.size != template.size:
                raise DimensionError('Model tensor has "{got}" values, expected "{size}".'
                                     ''.format(got=values.size, size=template.size))
            tensors.append(values.reshape(template.shape))

        model.set_parameters(tensors)
        return model


def state_key(state):
    '''str: The lookup key of a state: its values rounded to integers, hashed.'''
    rounded = numpy.rint(numpy.asarray(state, dtype=numpy.float64)).astype(numpy.int64)
    return hashlib.sha1(rounded.tobytes()).hexdigest()


class LinearQ(object):

    '''A lookup table of five Q-values per rounded state.

    Unseen states read as five zeros.

    Attributes:
        table (dict[str, :class:`numpy.ndarray`]): State key -> Q-values.
        learning_rate (float): How far each update moves toward its target.
        discount (float): The discount used by the caller's targets.

    '''

    kind = LINEAR

    def __init__(self, input_size, learning_rate=LEARNING_RATE, discount=1.0,
                 outputs=common.ACTION_COUNT):
        '''Create an empty table.'''
        super(LinearQ, self).__init__()
        self.input_size = int(input_size)
        self.outputs = int(outputs)
        self.learning_rate = float(learning_rate)
        self.discount = float(discount)
        self.table = dict()

    def _row(self, key):
        '''numpy.ndarray: A copy of the stored values, or zeros.'''
        try:
            return self.table[key].copy()
        except KeyError:
            return numpy.zeros(self.outputs, dtype=numpy.float64)

    def forward(self, states):
        '''Look up the Q-values of one state or a batch of states.'''
        batch, single = _as_batch(states, self.input_size)
        output = numpy.vstack([self._row(state_key(state)) for state in batch])
        if single:
            return output[0]
        return output

    def train_step(self, states, targets, masks):
        '''Move every unmasked value toward its target.

        Raises:
            NonFiniteLossError: If the loss is not finite.

        Returns:
            float: The masked loss before the update.

        '''
        batch, _ = _as_batch(states, self.input_size)
        targets = numpy.asarray(targets, dtype=numpy.float64).reshape(batch.shape[0], -1)
        masks = numpy.asarray(masks, dtype=numpy.float64).reshape(batch.shape[0], -1)

        loss = _masked_loss(self.forward(batch), targets, masks)
        if not math.isfinite(loss):
            raise NonFiniteLossError('Training loss "{loss}" is not finite.'.format(loss=loss), loss)

        for state, target, mask in zip(batch, targets, masks):
            key = state_key(state)
            row = self._row(key)
            row += self.learning_rate * (target - row) * mask
            self.table[key] = row

        return loss

    def dims(self):
        '''str: Input and output sizes, as written in model files.'''
        return '{inputs}x{outputs}'.format(inputs=self.input_size, outputs=self.outputs)

    def to_lines(self):
        '''list[str]: One "<key> q0 .. q4" line per entry, sorted by key.'''
        return ['{key} {values}'.format(
            key=key, values=' '.join(_NUMBER_FORMAT.format(value) for value in self.table[key]))
            for key in sorted(self.table)]

    @classmethod
    def from_lines(cls, dims, lines, learning_rate=LEARNING_RATE, discount=1.0):
        '''Rebuild a table from its model file body.'''
        inputs, outputs = [int(size) for size in dims.split('x')]
        model = cls(inputs, learning_rate=learning_rate, discount=discount, outputs=outputs)

        for line in lines:
            key, values = line.split(' ', 1)
            row = numpy.array([float(item) for item in values.split()], dtype=numpy.float64)
            if row.size != outputs:
                raise DimensionError('Table entry "{key}" has "{got}" values, expected "{size}".'
                                     ''.format(key=key, got=row.size, size=outputs))
            model.table[key] = row

        return model


class Policy(object):

    '''Epsilon-greedy action selection with a divisive decay.

    Attributes:
        epsilon (float): The current exploration probability.
        divisor (float): Epsilon is divided by this after each episode.
        floor (float): Epsilon never decays below this.

    '''

    def __init__(self, epsilon=EPSILON, divisor=EPSILON_DECAY, floor=EPSILON_FLOOR, seed=0):
        '''Create the policy and its random stream.'''
        super(Policy, self).__init__()
        if divisor < 1:
            raise ValueError('Divisor: "{divisor}" must be at least 1.'.format(divisor=divisor))

        self.epsilon = float(epsilon)
        self.divisor = float(divisor)
        self.floor = float(floor)
        self.rng = numpy.random.RandomState(seed)

    def __repr__(self):
        '''str: The policy settings.'''
        return '{name}(epsilon={epsilon!r}, divisor={divisor!r}, floor={floor!r})'.format(
            name=self.__class__.__name__, epsilon=self.epsilon,
            divisor=self.divisor, floor=self.floor)

    @classmethod
    def greedy(cls, seed=0):
        ''':class:`Policy`: A policy that never explores.'''
        return cls(epsilon=0.0, divisor=1.0, floor=0.0, seed=seed)

    def decay(self):
        '''Divide epsilon by the divisor, stopping at the floor.'''
        self.epsilon = max(self.floor, self.epsilon / self.divisor)
        return self


def greedy_action(q_values, mask):
    '''int: The allowed action with the highest value. Ties go to the lowest index.'''
    allowed = _allowed(mask)
    values = numpy.asarray(q_values, dtype=numpy.float64)
    return max(allowed, key=lambda action: (values[action], -action))


def _allowed(mask):
    '''list[int]: The allowed action indices.

    Raises:
        ValueError: If no action is allowed.

    '''
    allowed = [index for index, flag in enumerate(mask) if flag]
    if not allowed:
        raise ValueError('Mask: "{mask}" allows no action.'.format(mask=list(mask)))
    return allowed


def select_action(q_values, mask, policy):
    '''Pick an action with the epsilon-greedy rule.

    A uniform draw below epsilon picks uniformly among the allowed actions.
    Anything else picks the best allowed action.

    Args:
        q_values (:class:`numpy.ndarray`): Five values.
        mask (iterable[bool]): Five flags.
        policy (:class:`Policy`): The exploration settings and random stream.

    Raises:
        ValueError: If the mask allows nothing.

    Returns:
        int: The chosen action.

    '''
    allowed = _allowed(mask)
    theta = policy.rng.uniform()

    if theta < policy.epsilon:
        return allowed[policy.rng.randint(len(allowed))]

    return greedy_action(q_values, mask)


def decay(policy):
    ''':class:`Policy`: Decay a policy's epsilon once, in place.'''
    return policy.decay()


def forward(model, state):
    '''Evaluate any model on one state or a batch.'''
    return model.forward(state)


def train_step(model, batch):
    '''Train any model on a batch of (state, target, mask) triples.

    Raises:
        ValueError: If the batch is empty.

    Returns:
        float: The loss before the step.

    '''
    if not batch:
        raise ValueError('Cannot train on an empty batch.')

    states, targets, masks = zip(*batch)
    return model.train_step(numpy.vstack(states), numpy.vstack(targets),
                            numpy.vstack(masks).astype(numpy.float64))


def save_model(model, path, **meta):
    '''Write a model file.

    The first line is ``raildq-model v1 <kind> <dims>`` followed by
    ``key=value`` tokens. The rest holds the parameters, written with 17
    significant digits so they read back bit for bit.

    Args:
        model (:class:`DeepQ` or :class:`LinearQ`): The model to write.
        path (str): The file to write.
        **meta: Extra settings to keep in the header. Values must not contain spaces.

    Raises:
        ValueError: If a key or value contains a space or "=".

    '''
    meta = collections.OrderedDict(sorted(meta.items()))
    meta['learning_rate'] = _NUMBER_FORMAT.format(model.learning_rate)
    if model.kind == LINEAR:
        meta['discount'] = _NUMBER_FORMAT.format(model.discount)

    tokens = [HEADER, FORMAT_VERSION, model.kind, model.dims()]
    for key, value in meta.items():
        value = '' if value is None else str(value)
        if ' ' in key or '=' in key or ' ' in value:
            raise ValueError('Meta entry "{key}={value}" cannot contain spaces.'
                             ''.format(key=key, value=value))
        tokens.append('{key}={value}'.format(key=key, value=value))

    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)

    with io.open(path, 'w', encoding='utf-8', newline='\n') as file_:
        file_.write(u' '.join(tokens) + u'\n')
        for line in model.to_lines():
            file_.write(line + u'\n')

    _LOGGER.info('Wrote "%s" model to "%s".', model.kind, path)


def load_model(path):
    '''Read a model file.

    Args:
        path (str): The file written by :func:`save_model`.

    Raises:
        ValueError: If the header is not a supported model header.

    Returns:
        tuple[:class:`DeepQ` or :class:`LinearQ`, dict[str, str]]: The model and its header settings.

    '''
    with io.open(path, 'r', encoding='utf-8') as file_:
        lines = file_.read().splitlines()

    if not lines:
        raise ValueError('Path: "{path}" is empty.'.format(path=path))

    tokens = lines[0].split(' ')
    if len(tokens) < 4 or tokens[0] != HEADER or tokens[1] != FORMAT_VERSION:
        raise ValueError('Path: "{path}" does not start with a "{header} {version}" header.'
                         ''.format(path=path, header=HEADER, version=FORMAT_VERSION))

    kind, dims = tokens[2], tokens[3]
    meta = collections.OrderedDict(token.split('=', 1) for token in tokens[4:])
    learning_rate = float(meta.pop('learning_rate', LEARNING_RATE))
    body = [line for line in lines[1:] if line]

    if kind == DEEP:
        return (DeepQ.from_lines(dims, body, learning_rate=learning_rate), meta)

    if kind == LINEAR:
        discount = float(meta.pop('discount', 1.0))
        return (LinearQ.from_lines(dims, body, learning_rate=learning_rate, discount=discount),
                meta)

    raise ValueError('Model kind: "{kind}" is unknown. Options were, "{opt}".'
                     ''.format(kind=kind, opt=MODEL_KINDS))
