from patlock.evaluation import EvalReport
from patlock.failures import FailureCluster
from patlock.plotreport import plot_clusters, plot_cycle


def test_plot_clusters(tmp_path):
    clusters = [FailureCluster(('java.lang.E', 'm'), (1, 2), True),
                FailureCluster(('java.lang.F', ''), (3,), False)]
    path = tmp_path / 'clusters.png'
    plot_clusters(clusters, path)
    assert path.read_bytes()[:4] == b'\x89PNG'
    plot_clusters([], tmp_path / 'empty.png')
    assert (tmp_path / 'empty.png').is_file()


def test_plot_cycle_with_undefined_metrics(tmp_path):
    reports = [('base', EvalReport('r', '', 3, 10, 0, 3, 13, 16)),
               ('empty', EvalReport('r', '', 0, 0, 0, 3, 0, 3)),
               ('refined', EvalReport('r', '', 3, 1, 0, 12, 4, 16))]
    path = tmp_path / 'cycle.png'
    plot_cycle(reports, path, 0.8, 1.0)
    assert path.read_bytes()[:4] == b'\x89PNG'
