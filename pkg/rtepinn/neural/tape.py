"""
Reverse-mode automatic differentiation over numpy arrays.

Every operation is a :class:`Function` with static ``forward``/``backward``; applying
it to tensors that require gradients records the node on the output tensor.
:meth:`Tensor.backward` walks the recorded graph in reverse topological order.
"""

from typing import Callable, Optional, Tuple

import numpy as np

from ..utils.errors import TapeError


class Context:
    def __init__(self):
        self.saved_tensors = ()
        self.saved_data = {}

    def save_for_backward(self, *arrays):
        self.saved_tensors = arrays

    def save(self, **kwargs):
        self.saved_data.update(kwargs)


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "ctx", "backward_fn", "prev_tensors")
    __array_priority__ = 1000

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=float)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.ctx = None
        self.backward_fn = None
        self.prev_tensors: Tuple["Tensor", ...] = ()

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        if self.data.size != 1:
            raise TapeError(f"item() on a tensor of shape {self.data.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # arithmetic
    def __add__(self, other):
        return Add.apply(self, as_tensor(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Sub.apply(self, as_tensor(other))

    def __rsub__(self, other):
        return Sub.apply(as_tensor(other), self)

    def __mul__(self, other):
        return Mul.apply(self, as_tensor(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return Mul.apply(self, Reciprocal.apply(other))
        return Mul.apply(self, as_tensor(1.0 / np.asarray(other, dtype=float)))

    def __neg__(self):
        return Neg.apply(self)

    def __pow__(self, exponent):
        return Power.apply(self, exponent=int(exponent))

    def __matmul__(self, other):
        return MatMul.apply(self, as_tensor(other))

    def __rmatmul__(self, other):
        return MatMul.apply(as_tensor(other), self)

    def __getitem__(self, index):
        return GetItem.apply(self, index=index)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Reshape.apply(self, shape=shape)

    def sum(self, axis=None):
        return Sum.apply(self, axis=axis)

    def mean(self, axis=None):
        count = self.data.size if axis is None else self.data.shape[axis]
        return Sum.apply(self, axis=axis) * (1.0 / count)

    def backward(self):
        """Accumulate d(self)/d(leaf) into every leaf that requires gradients."""
        if not self.requires_grad:
            raise TapeError("backward() on a tensor that is not tracked")
        if self.data.size != 1:
            raise TapeError(f"backward() needs a scalar, got shape {self.data.shape}")
        backward_pass(self)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Function:
    @staticmethod
    def forward(ctx, *args, **kwargs) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def backward(ctx, grad_output):
        raise NotImplementedError

    @classmethod
    def apply(cls, *args: Tensor, **kwargs) -> Tensor:
        ctx = Context()
        output = Tensor(cls.forward(ctx, *[a.data for a in args], **kwargs))
        if any(a.requires_grad for a in args):
            output.requires_grad = True
            output.ctx = ctx
            output.backward_fn = cls.backward
            output.prev_tensors = args
        return output


def backward_pass(tensor: Tensor) -> None:
    topo = []
    visited = set()
    stack = [(tensor, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited or node.backward_fn is None:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for prev in node.prev_tensors:
            if prev.requires_grad and id(prev) not in visited:
                stack.append((prev, False))

    grads = {id(tensor): np.ones_like(tensor.data)}
    for node in reversed(topo):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        inputs = node.backward_fn(node.ctx, grad)
        if not isinstance(inputs, tuple):
            inputs = (inputs,)
        for prev, g in zip(node.prev_tensors, inputs):
            if g is None or not prev.requires_grad:
                continue
            if prev.backward_fn is None:
                prev.grad = g.copy() if prev.grad is None else prev.grad + g
            elif id(prev) in grads:
                grads[id(prev)] = grads[id(prev)] + g
            else:
                grads[id(prev)] = g


class Add(Function):
    @staticmethod
    def forward(ctx, a, b):
        ctx.save(shapes=(a.shape, b.shape))
        return a + b

    @staticmethod
    def backward(ctx, grad):
        sa, sb = ctx.saved_data["shapes"]
        return _unbroadcast(grad, sa), _unbroadcast(grad, sb)


class Sub(Function):
    @staticmethod
    def forward(ctx, a, b):
        ctx.save(shapes=(a.shape, b.shape))
        return a - b

    @staticmethod
    def backward(ctx, grad):
        sa, sb = ctx.saved_data["shapes"]
        return _unbroadcast(grad, sa), _unbroadcast(-grad, sb)


class Mul(Function):
    @staticmethod
    def forward(ctx, a, b):
        ctx.save_for_backward(a, b)
        return a * b

    @staticmethod
    def backward(ctx, grad):
        a, b = ctx.saved_tensors
        return _unbroadcast(grad * b, a.shape), _unbroadcast(grad * a, b.shape)


class Reciprocal(Function):
    @staticmethod
    def forward(ctx, a):
        out = 1.0 / a
        ctx.save_for_backward(out)
        return out

    @staticmethod
    def backward(ctx, grad):
        (out,) = ctx.saved_tensors
        return -grad * out * out


class Neg(Function):
    @staticmethod
    def forward(ctx, a):
        return -a

    @staticmethod
    def backward(ctx, grad):
        return -grad


class Power(Function):
    @staticmethod
    def forward(ctx, a, exponent):
        ctx.save_for_backward(a)
        ctx.save(exponent=exponent)
        return a ** exponent

    @staticmethod
    def backward(ctx, grad):
        (a,) = ctx.saved_tensors
        p = ctx.saved_data["exponent"]
        return grad * p * a ** (p - 1)


class MatMul(Function):
    @staticmethod
    def forward(ctx, a, b):
        ctx.save_for_backward(a, b)
        return a @ b

    @staticmethod
    def backward(ctx, grad):
        a, b = ctx.saved_tensors
        if b.ndim == 1:
            ga = np.multiply.outer(grad, b)
            gb = np.tensordot(a, grad, axes=(tuple(range(a.ndim - 1)), tuple(range(grad.ndim))))
            return ga, gb
        ga = grad @ b.T
        gb = a.reshape(-1, a.shape[-1]).T @ grad.reshape(-1, grad.shape[-1])
        return ga, gb


class Sum(Function):
    @staticmethod
    def forward(ctx, a, axis=None):
        ctx.save(shape=a.shape, axis=axis)
        return np.sum(a, axis=axis)

    @staticmethod
    def backward(ctx, grad):
        shape, axis = ctx.saved_data["shape"], ctx.saved_data["axis"]
        if axis is not None:
            grad = np.expand_dims(grad, axis)
        return np.broadcast_to(grad, shape).copy()


class Reshape(Function):
    @staticmethod
    def forward(ctx, a, shape):
        ctx.save(shape=a.shape)
        return a.reshape(shape)

    @staticmethod
    def backward(ctx, grad):
        return grad.reshape(ctx.saved_data["shape"])


class GetItem(Function):
    @staticmethod
    def forward(ctx, a, index):
        ctx.save(shape=a.shape, index=index)
        return a[index]

    @staticmethod
    def backward(ctx, grad):
        full = np.zeros(ctx.saved_data["shape"])
        np.add.at(full, ctx.saved_data["index"], grad)
        return full


class Tanh(Function):
    @staticmethod
    def forward(ctx, a):
        out = np.tanh(a)
        ctx.save_for_backward(out)
        return out

    @staticmethod
    def backward(ctx, grad):
        (out,) = ctx.saved_tensors
        return grad * (1.0 - out * out)


def _sigmoid(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    ea = np.exp(a[~pos])
    out[~pos] = ea / (1.0 + ea)
    return out


class Sigmoid(Function):
    @staticmethod
    def forward(ctx, a):
        out = _sigmoid(a)
        ctx.save_for_backward(out)
        return out

    @staticmethod
    def backward(ctx, grad):
        (out,) = ctx.saved_tensors
        return grad * out * (1.0 - out)


class Softplus(Function):
    @staticmethod
    def forward(ctx, a):
        ctx.save_for_backward(a)
        return np.logaddexp(0.0, a)

    @staticmethod
    def backward(ctx, grad):
        (a,) = ctx.saved_tensors
        return grad * _sigmoid(a)


class Exp(Function):
    @staticmethod
    def forward(ctx, a):
        out = np.exp(a)
        ctx.save_for_backward(out)
        return out

    @staticmethod
    def backward(ctx, grad):
        (out,) = ctx.saved_tensors
        return grad * out


def tanh(x: Tensor) -> Tensor:
    return Tanh.apply(as_tensor(x))


def sigmoid(x: Tensor) -> Tensor:
    return Sigmoid.apply(as_tensor(x))


def softplus(x: Tensor) -> Tensor:
    return Softplus.apply(as_tensor(x))


def exp(x: Tensor) -> Tensor:
    return Exp.apply(as_tensor(x))


def grad_params(loss_evaluator: Callable[[Tensor], Tensor],
                params: np.ndarray) -> Tuple[float, np.ndarray]:
    """Loss value and its exact gradient with respect to the flat parameter vector."""
    leaf = Tensor(np.array(params, dtype=float), requires_grad=True)
    loss = loss_evaluator(leaf)
    if not isinstance(loss, Tensor):
        raise TapeError("loss evaluator must return a Tensor")
    value = loss.item()
    if not loss.requires_grad:
        return value, np.zeros_like(leaf.data)
    loss.backward()
    grad = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)
    return value, grad
