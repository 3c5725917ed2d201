#!/usr/bin/env python3

from typing import Any, Dict

from .base_controller import BaseController
from ..services.evaluation_service import (
    SEG_CASE_COLUMNS, evaluate_against_ratings, evaluate_against_segmentations, read_predictions
)
from ..services.logger import Logger
from ..services.metrics_service import linear_fit, scatter_export
from ..services.models.run_models import EvalMode
from ..services.ratings_service import aggregate, read_ratings
from ..services.report_service import plot_bland_altman, plot_overlap, plot_scatter, write_csv, write_json

log = Logger('controller.eval')


REPORT_FILENAME = 'eval_report.json'
SCATTER_FILENAME = 'eval_scatter.csv'
CASES_FILENAME = 'eval_cases.csv'
OVERLAP_PLOT_FILENAME = 'eval_overlap.png'


class EvalController(BaseController):
    """
    Compare a predictions CSV with human ratings (regression metrics and
    Bland-Altman) or with ground-truth segmentations (DSC, surface DSC and
    their correlation with the predicted stars).
    """

    command = 'eval'
    ledgered = True

    def _execute(self) -> Dict[str, Any]:
        estimates = read_predictions(self.config.paths.predictions_csv)
        if self.config.eval_mode is EvalMode.RATINGS:
            return self._against_ratings(estimates)
        return self._against_segmentations(estimates)

    def _against_ratings(self, estimates) -> Dict[str, Any]:
        aggregates = aggregate(read_ratings(self.config.paths.ratings_csv).records)
        report = evaluate_against_ratings(estimates, aggregates)
        fit = scatter_export(report.series, self.out_path(SCATTER_FILENAME))
        write_json(self.out_path(REPORT_FILENAME), {
            'mode': report.mode,
            'metrics': report.metrics,
            'fit': fit.to_dict(),
        })
        if self.config.plot:
            refs, preds = report.series.references, report.series.predictions
            plot_scatter(refs, preds, self.out_path('eval_scatter.png'), fit.slope, fit.intercept)
            plot_bland_altman(refs, preds, self.out_path('eval_bland_altman.png'),
                              report.metrics['mean_diff'], report.metrics['loa_low'], report.metrics['loa_high'])
        return report.metrics

    def _against_segmentations(self, estimates) -> Dict[str, Any]:
        report = evaluate_against_segmentations(
            estimates, self.config.paths.data_root, self.config.tolerance_mm, self.progress
        )
        fit = linear_fit(report.series)
        write_csv(self.out_path(CASES_FILENAME), report.cases, columns=SEG_CASE_COLUMNS)
        write_json(self.out_path(REPORT_FILENAME), {
            'mode': report.mode,
            'tolerance_mm': self.config.tolerance_mm,
            'metrics': report.metrics,
            'fit': fit.to_dict(),
        })
        if self.config.plot:
            plot_overlap(report.series.references, report.series.predictions, self.out_path(OVERLAP_PLOT_FILENAME),
                         surface_dice=[case['surface_dice'] for case in report.cases],
                         slope=fit.slope, intercept=fit.intercept)
        return report.metrics
