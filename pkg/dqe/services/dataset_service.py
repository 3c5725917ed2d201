#!/usr/bin/env python3

"""
Dataset Service - On-disk dataset layout, candidate discovery and training sample assembly

Layout under a data root:
  <exam_id>/t1.nii.gz, t1c.nii.gz, t2.nii.gz, flair.nii.gz   MR modalities
  <exam_id>/seg_<seg_id>.nii.gz                               candidate segmentations
  <exam_id>/gt.nii.gz                                         ground truth (optional)
"""

import os
from collections import defaultdict
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from tqdm import tqdm

from .exceptions import ExamNotFoundError
from .logger import Logger
from .models.quality_models import CurationCandidate
from .models.rating_models import RatingAggregate, RatingKey
from .models.synth_models import SynthExam
from .models.train_models import TrainConfig
from .models.volume_models import MODALITIES, Axis, Exam
from .training_service import TrainingSample
from .volume_service import extract_all_views, load_exam, load_segmentation, save_exam, save_volume

log = Logger('dataset')


NIFTI_SUFFIX = '.nii.gz'
SEG_PREFIX = 'seg_'
GT_NAME = 'gt'


def exam_dir(data_root: str, exam_id: str) -> str:
    return os.path.join(data_root, exam_id)


def modality_paths(data_root: str, exam_id: str) -> Dict[str, str]:
    return {m: os.path.join(data_root, exam_id, f"{m}{NIFTI_SUFFIX}") for m in MODALITIES}


def segmentation_path(data_root: str, exam_id: str, seg_id: str) -> str:
    return os.path.join(data_root, exam_id, f"{SEG_PREFIX}{seg_id}{NIFTI_SUFFIX}")


def ground_truth_path(data_root: str, exam_id: str) -> str:
    return os.path.join(data_root, exam_id, f"{GT_NAME}{NIFTI_SUFFIX}")


def list_exams(data_root: str) -> List[str]:
    """Exam directories (those holding a t1 volume), sorted"""
    if not os.path.isdir(data_root):
        raise ExamNotFoundError(f"Data root not found: {data_root}")
    return sorted(
        name for name in os.listdir(data_root)
        if os.path.isfile(os.path.join(data_root, name, f"{MODALITIES[0]}{NIFTI_SUFFIX}"))
    )


def list_segmentations(data_root: str, exam_id: str) -> List[str]:
    directory = exam_dir(data_root, exam_id)
    return sorted(
        name[len(SEG_PREFIX):-len(NIFTI_SUFFIX)] for name in os.listdir(directory)
        if name.startswith(SEG_PREFIX) and name.endswith(NIFTI_SUFFIX)
    )


def load_candidate(data_root: str, exam_id: str, seg_id: str) -> Exam:
    """The exam's images paired with one candidate segmentation"""
    return load_exam(modality_paths(data_root, exam_id), segmentation_path(data_root, exam_id, seg_id), exam_id)


def load_ground_truth(data_root: str, exam_id: str):
    return load_segmentation(ground_truth_path(data_root, exam_id))


def discover_candidates(data_root: str, keys: Optional[Iterable[RatingKey]] = None) -> List[CurationCandidate]:
    """
    Every (exam, segmentation) pair under the data root, or just `keys`.
    Volumes are read lazily when a candidate is resolved.

    Raises:
        ExamNotFoundError: a requested segmentation file does not exist
    """
    if keys is None:
        keys = [(e, s) for e in list_exams(data_root) for s in list_segmentations(data_root, e)]
    candidates = []
    for exam_id, seg_id in keys:
        path = segmentation_path(data_root, exam_id, seg_id)
        if not os.path.isfile(path):
            raise ExamNotFoundError(f"Segmentation not found: {path}")
        candidates.append(CurationCandidate(
            exam_id=exam_id,
            seg_id=seg_id,
            loader=lambda e=exam_id, s=seg_id: load_candidate(data_root, e, s),
        ))
    log.log_debug(f"Discovered {len(candidates)} candidate segmentations under {data_root}")
    return candidates


def write_synth_exam(case: SynthExam, data_root: str) -> List[str]:
    """Write a phantom exam, its ground truth and its candidates in the dataset layout"""
    directory = exam_dir(data_root, case.exam_id)
    written = list(save_exam(case.exam, directory, seg_name=GT_NAME).values())
    for candidate in case.candidates:
        path = segmentation_path(data_root, case.exam_id, candidate.seg_id)
        save_volume(candidate.seg.data.astype('uint8'), candidate.seg.spacing, path, case.exam.axis_map)
        written.append(path)
    return written


def iter_segmented_exams(data_root: str, keys: Iterable[RatingKey], progress: bool = False,
                         desc: str = "Loading") -> Iterator[Tuple[RatingKey, Exam]]:
    """
    Each (exam_id, seg_id) key with its exam, grouped by exam so each exam's
    MR images are read once.
    """
    by_exam: Dict[str, List[str]] = defaultdict(list)
    for exam_id, seg_id in sorted(keys):
        by_exam[exam_id].append(seg_id)

    for exam_id in tqdm(sorted(by_exam), desc=desc, unit="exam", disable=not progress):
        seg_ids = by_exam[exam_id]
        exam = load_candidate(data_root, exam_id, seg_ids[0])
        yield (exam_id, seg_ids[0]), exam
        for seg_id in seg_ids[1:]:
            yield (exam_id, seg_id), exam.with_segmentation(
                load_segmentation(segmentation_path(data_root, exam_id, seg_id))
            )


def build_training_samples(data_root: str, aggregates: Dict[RatingKey, RatingAggregate],
                           config: TrainConfig, keys: Optional[Sequence[RatingKey]] = None,
                           progress: bool = False) -> List[TrainingSample]:
    """One sample per view of every rated segmentation, labelled with the pooled mean stars"""
    wanted = sorted(keys if keys is not None else aggregates)
    samples = []
    for (exam_id, seg_id), exam in iter_segmented_exams(data_root, wanted, progress):
        views = extract_all_views(exam, config.encoding, config.normalization)
        label = aggregates[(exam_id, seg_id)].mean_stars
        for axis in Axis:
            samples.append(TrainingSample(stack=views[axis], mean_stars=label, exam_id=exam_id, seg_id=seg_id))

    log.log_info(f"Built {len(samples)} training samples from {len(wanted)} segmentations")
    return samples
