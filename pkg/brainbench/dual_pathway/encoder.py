"""1D-CNN BOLD encoder shared across ROIs."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
import tensorflow as tf

from brainbench.connectome import NodeFeatureMatrix, TimeSeriesMatrix
from brainbench.data_io import zscore_rows
from brainbench.graph_models.layers import DTYPE, dense, initializer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncoderSpec:
    conv_layers: int = 2
    kernel_size: int = 7
    stride: int = 2
    out_dim: int = 32
    channels: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.out_dim < 1 or self.kernel_size < 1 or self.stride < 1 or self.channels < 1:
            raise ValueError('encoder sizes must all be >= 1: %s' % (self,))
        if self.conv_layers < 1:
            raise ValueError('encoder needs at least one convolution layer')

    def to_dict(self):
        return asdict(self)


class BoldEncoder(tf.keras.layers.Layer):
    """Maps (batch, n_roi, t) series to (batch, n_roi, out_dim) node features.

    Every ROI goes through the same convolutions: conv + relu per layer,
    global average pooling over time, then an affine map to out_dim.
    """

    def __init__(self, spec, **kwargs):
        super(BoldEncoder, self).__init__(dtype=DTYPE, **kwargs)
        self.spec = spec
        self.convs = [
            tf.keras.layers.Conv1D(spec.channels, spec.kernel_size, strides=spec.stride, padding='same',
                                   activation='relu', kernel_initializer=initializer(spec.seed * 1000 + i),
                                   dtype=DTYPE)
            for i in range(spec.conv_layers)]
        self.pool = tf.keras.layers.GlobalAveragePooling1D(dtype=DTYPE)
        self.proj = dense(spec.out_dim, spec.seed * 1000 + 99)

    def check_length(self, length):
        if length < self.spec.kernel_size:
            raise ValueError('series of length %d is shorter than the encoder kernel (%d)'
                             % (length, self.spec.kernel_size))

    def call(self, bold):
        n_roi, length = bold.shape[1], bold.shape[2]
        self.check_length(length)
        h = tf.reshape(bold, [-1, length, 1])
        for conv in self.convs:
            h = conv(h)
        h = self.proj(self.pool(h))
        return tf.reshape(h, [-1, n_roi, self.spec.out_dim])


def encode_bold(encoder, bold):
    """Node features of one subject: z-scored series through the shared encoder."""
    values = bold.values if isinstance(bold, TimeSeriesMatrix) else np.asarray(bold, dtype=np.float64)
    encoder.check_length(values.shape[1])
    out = encoder(tf.constant(zscore_rows(values)[None], dtype=DTYPE)).numpy()[0]
    labels = bold.roi_labels if isinstance(bold, TimeSeriesMatrix) else ()
    return NodeFeatureMatrix(out, tuple(labels))
