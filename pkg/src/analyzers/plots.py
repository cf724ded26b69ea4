"""Static figures: solution cuts, active elements and convergence"""
import logging
import os
from typing import Optional

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns

from processors.dumps import support_centers


class ResultPlotter:
    """Draws run and sweep figures into the configured plot folder"""

    def __init__(self, config):
        self.config = config
        self.logger = logging.getLogger(__name__)
        plt.style.use('default')
        sns.set_theme(style='whitegrid')

    def _save(self, fig, name: str) -> Optional[str]:
        folder = self.config.output.plot_folder
        if not folder:
            plt.close(fig)
            return None
        os.makedirs(folder, exist_ok=True)
        path = os.path.join(folder, name)
        fig.savefig(path, dpi=300, bbox_inches='tight')
        plt.close(fig)
        self.logger.info(f"Saved figure {path}")
        return path

    def plot_solution(self, samples: pd.DataFrame, title: str, name: str = 'solution.png') -> Optional[str]:
        """Contour of a 2D cut, or a line for one-dimensional runs"""
        fig, ax = plt.subplots(figsize=(7, 6))
        if 'x2' not in samples.columns:
            ax.plot(samples['x1'], samples['value'], color='steelblue')
            ax.set_xlabel('x1')
            ax.set_ylabel('phi')
        else:
            cut = samples
            for column in samples.columns:
                if column.startswith('x') and column not in ('x1', 'x2'):
                    cut = cut[cut[column] == 0.0]
            grid = cut.pivot_table(index='x2', columns='x1', values='value')
            contour = ax.contourf(grid.columns.to_numpy(), grid.index.to_numpy(), grid.to_numpy(),
                                  levels=30, cmap='viridis')
            fig.colorbar(contour, ax=ax)
            ax.set_xlabel('x1')
            ax.set_ylabel('x2')
            ax.set_aspect('equal')
        ax.set_title(title)
        return self._save(fig, name)

    def plot_active(self, active: pd.DataFrame, indices: np.ndarray, title: str,
                    name: str = 'active.png') -> Optional[str]:
        """Support centers of the active elements in the (x1, x2) plane, coloured by |l|_inf"""
        centers = support_centers(indices)
        level_columns = [c for c in active.columns if c.startswith('l') and c[1:].isdigit()]
        frame = pd.DataFrame({'x1': centers[:, 0],
                              'x2': centers[:, 1] if centers.shape[1] > 1 else np.zeros(len(centers)),
                              'level': active[level_columns].max(axis=1).to_numpy()})
        fig, ax = plt.subplots(figsize=(7, 6))
        sns.scatterplot(data=frame, x='x1', y='x2', hue='level', palette='viridis', s=8, linewidth=0, ax=ax)
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_aspect('equal')
        ax.set_title(title)
        return self._save(fig, name)

    def plot_convergence(self, table: pd.DataFrame, title: str, name: str = 'convergence.png') -> Optional[str]:
        """log-log error against DoF"""
        fig, ax = plt.subplots(figsize=(7, 5))
        sns.lineplot(data=table, x='dof', y='L2_error', marker='o', ax=ax)
        ax.set_xscale('log')
        ax.set_yscale('log')
        ax.set_xlabel('DoF')
        ax.set_ylabel('L2 error')
        ax.set_title(title)
        ax.grid(True, alpha=0.3, which='both')
        return self._save(fig, name)
