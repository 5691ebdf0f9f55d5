#!/usr/bin/env python3

"""

plotreport
==========

This module contains functions plotting the failure clusters and the
rule improvement cycle.

"""

import logging

import numpy as np
import matplotlib
matplotlib.use('Agg')
import matplotlib.pylab as plt

logger = logging.getLogger(__name__)


def plot_clusters(clusters, path):
    """
    Save a bar chart of failure cluster sizes.

    Pattern candidates are drawn in the first colour, the other
    clusters in grey.

    Parameters
    ----------
    clusters : list of FailureCluster
    path : str or Path

    """
    sizes = np.array([c.size for c in clusters], dtype=int)
    x = np.arange(1, len(clusters) + 1)
    colors = ['C0' if c.is_pattern_candidate else 'C7' for c in clusters]
    fig = plt.figure()
    plt.bar(x, sizes, color=colors)
    plt.xticks(x, [str(k) for k in x])
    plt.xlabel('Cluster')
    plt.ylabel('Failures')
    plt.title('Failure clusters (blue: pattern candidates)')
    if len(sizes):
        plt.ylim(0, np.max(sizes) + 1)
    fig.savefig(path)
    plt.close(fig)
    logger.info('wrote %s', path)


def plot_cycle(reports, path, min_precision=None, min_recall=None):
    """
    Save precision and relative recall per rule version.

    Parameters
    ----------
    reports : list of (str, EvalReport)
        Label and report of every rule version, in cycle order.
    path : str or Path
    min_precision, min_recall : float, optional
        Gate thresholds, drawn as dashed lines.

    """
    labels = [label for label, _ in reports]
    # Undefined metrics are left out of the lines.
    precision = np.array([np.nan if r.precision is None else r.precision
                          for _, r in reports])
    recall = np.array([np.nan if r.relative_recall is None
                       else r.relative_recall for _, r in reports])
    x = np.arange(len(reports))
    fig = plt.figure()
    plt.plot(x, 100 * precision, '-o', c='C0', label='precision')
    plt.plot(x, 100 * recall, '-s', c='C1', label='relative recall')
    if min_precision is not None:
        plt.axhline(100 * min_precision, ls='--', c='C0')
    if min_recall is not None:
        plt.axhline(100 * min_recall, ls='--', c='C1')
    plt.xticks(x, labels)
    plt.ylim(0, 105)
    plt.ylabel('%')
    plt.legend()
    plt.title('Rule improvement cycle')
    fig.savefig(path)
    plt.close(fig)
    logger.info('wrote %s', path)
