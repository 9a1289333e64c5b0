"""Pure-numpy versions of the assembly kernels in ``_kernels.pyx``."""

import numpy as np


def scatter_laplacian(out, i_idx, k_idx, weights):
    """Add ``weights[j] * q_j q_j^T`` for every edge into ``out`` in place."""
    np.add.at(out, (i_idx, i_idx), weights)
    np.add.at(out, (k_idx, k_idx), weights)
    np.add.at(out, (i_idx, k_idx), -weights)
    np.add.at(out, (k_idx, i_idx), -weights)


def scatter_blocks(out, i_idx, k_idx, blocks):
    """Add ``E_j kron blocks[j]`` for every edge into ``out`` in place."""
    ell = blocks.shape[1]
    off = np.arange(ell)
    ri = (i_idx * ell)[:, None, None] + off[None, :, None]
    ci = (i_idx * ell)[:, None, None] + off[None, None, :]
    rk = (k_idx * ell)[:, None, None] + off[None, :, None]
    ck = (k_idx * ell)[:, None, None] + off[None, None, :]
    np.add.at(out, (ri, ci), blocks)
    np.add.at(out, (rk, ck), blocks)
    np.add.at(out, (ri, ck), -blocks)
    np.add.at(out, (rk, ci), -blocks)


def congruence(transforms, infos):
    """Return ``transforms[j].T @ infos[j] @ transforms[j]`` stacked over j."""
    return np.einsum("jca,jcd,jdb->jab", transforms, infos, transforms, optimize=True)
