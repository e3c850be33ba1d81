"""
End-to-end experiment runs: simulate the measurement, pre-train, extract the subspace, reconstruct and report

Pre-training and subspace artifacts are kept in their own directories together with a fingerprint of the settings
they were produced with, so runs sharing these settings reuse them
"""
import os
import shutil
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from ruamel.yaml import YAML

from subdip.constants import core_constant
from subdip.harness import phantoms
from subdip.harness.experiment_config import ExperimentConfig, RunSeeds
from subdip.harness.run_report import RunReport, TraceRow, CONFIG_SNAPSHOT_FILE
from subdip.network.evaluator import NetworkEvaluator, NetworkInput
from subdip.network.param_vector import ParamVector, ParamLayout
from subdip.network.unet import UNet, init_params, layout_of
from subdip.objective.loss import ObjectiveConfig, NetworkObjective, SubspaceObjective, FullParameterObjective
from subdip.objective.metrics import PsnrTracker, psnr
from subdip.operators.blur import gaussian_blur_operator
from subdip.operators.fbp import fbp
from subdip.operators.geometry import ParallelBeamGeometry
from subdip.operators.image import Image, Measurement
from subdip.operators.linear_operator import LinearOperator, identity_operator
from subdip.operators.noise import NoiseModel, add_noise
from subdip.operators.parallel_beam import assemble_parallel_beam
from subdip.optim.adam import adam_run
from subdip.optim.lbfgs import lbfgs_run
from subdip.optim.ngd import ngd_run
from subdip.optim.optim_result import OptimResult
from subdip.optim.stopping import EarlyStopper
from subdip.subspace.pretrain import PretrainSample, build_dataset, pretrain
from subdip.subspace.subspace_model import SubspaceModel, build_subspace_model, d_lev_from_fraction, init_coefficients, random_basis
from subdip.subspace.svd import SvdResult, batch_svd, incremental_svd
from subdip.subspace.trajectory import TrajectoryStore
from subdip.storage import sdip_format
from subdip.utils import file_util, misc_util
from subdip.utils.exception import ConfigError, NumericalFailure, IllegalArgument, IllegalArchConfig, DimensionMismatch, OperatorTooLarge, DecodeError
from subdip.utils.logger import get_logger, DebugOption
from subdip.utils.serializer import serialize

PRETRAIN_MANIFEST = 'pretrain.yml'
THETA_PRE_FILE = 'theta_pre.sdip'
TRAJECTORY_DIRECTORY = 'trajectory'
SUBSPACE_RUN_FILE = 'extraction.yml'
# the optimised coefficients, or network parameters for the full-parameter methods
FINAL_ITERATE_FILE = 'final_iterate.sdip'

# failures caused by what the user asked for, rather than by the numerics
CONFIG_FAILURES = (ConfigError, IllegalArgument, IllegalArchConfig, DimensionMismatch, OperatorTooLarge, DecodeError, FileNotFoundError)


class TaskSetup(NamedTuple):
	op: LinearOperator
	geometry: Optional[ParallelBeamGeometry]
	ground_truth: Image
	measurement: Measurement
	network_input: Image


class PretrainArtifacts(NamedTuple):
	theta_pre: ParamVector
	store: TrajectoryStore
	fingerprint: str


class ExtractedSubspace(NamedTuple):
	model: SubspaceModel
	peak_bytes: int


# ------------------------
#   Task simulation
# ------------------------

def build_operator(cfg: ExperimentConfig) -> Tuple[LinearOperator, Optional[ParallelBeamGeometry]]:
	size = cfg.image_size
	if cfg.task == 'ct':
		geometry = ParallelBeamGeometry(cfg.geometry.n_angles, cfg.geometry.n_detectors, cfg.geometry.detector_spacing)
		op = assemble_parallel_beam(geometry, size, size, entry_budget=cfg.operator_entry_budget, workers=cfg.operator_workers)
		return op, geometry
	if cfg.task == 'deblur':
		return gaussian_blur_operator(cfg.blur_kappa, size, size), None
	return identity_operator(size, size), None


def network_input_of(op: LinearOperator, geometry: Optional[ParallelBeamGeometry], y: Measurement) -> Image:
	"""
	The FBP reconstruction for tomography, the degraded image itself for restoration
	"""
	height, width = op.image_shape
	if geometry is not None:
		return fbp(geometry, y, height, width)
	return Image.from_vector(y.data, height, width)


def simulate(op: LinearOperator, geometry: Optional[ParallelBeamGeometry], ground_truth: Image, p: float, seed: int) -> Tuple[Measurement, Image]:
	y = add_noise(op.apply(ground_truth), NoiseModel(p, seed))
	return y, network_input_of(op, geometry, y)


def load_ground_truth(cfg: ExperimentConfig) -> Image:
	if cfg.ground_truth_file is None:
		return phantoms.generate(cfg.phantom, 1)[0]
	image = Image.load_pgm(cfg.ground_truth_file)
	if image.shape != (cfg.image_size, cfg.image_size):
		raise ConfigError('Ground truth {} is {}x{}, expected {}x{}'.format(cfg.ground_truth_file, *image.shape, cfg.image_size, cfg.image_size))
	return image


def build_task(cfg: ExperimentConfig, seeds: RunSeeds) -> TaskSetup:
	op, geometry = build_operator(cfg)
	ground_truth = load_ground_truth(cfg)
	y, x0 = simulate(op, geometry, ground_truth, cfg.noise_p, seeds.noise)
	get_logger().debug('Task {} with operator {}, noise sigma {:.4g}'.format(cfg.task, op, NoiseModel(cfg.noise_p, seeds.noise).sigma(op.apply(ground_truth))), option=DebugOption.HARNESS)
	return TaskSetup(op, geometry, ground_truth, y, x0)


# ------------------------
#   Pre-training
# ------------------------

def _fingerprint(*parts) -> str:
	return file_util.sha256_of_text(repr(serialize(list(parts))))


def pretraining_fingerprint(cfg: ExperimentConfig) -> str:
	settings = cfg.pretraining.serialize()
	settings.pop('directory')
	if cfg.pretraining.degradation == 'random':
		# the drawn levels stand in for the task's noise_p and blur_kappa
		return _fingerprint(cfg.task, cfg.geometry, None, None, cfg.network, settings, cfg.subspace.d_pre)
	for key in ('noise_p_range', 'blur_kappa_range', 'random_blur_noise_p'):
		settings.pop(key)
	return _fingerprint(cfg.task, cfg.geometry, cfg.blur_kappa, cfg.noise_p, cfg.network, settings, cfg.subspace.d_pre)


def _read_yaml(file_path: str) -> Optional[dict]:
	if not os.path.isfile(file_path):
		return None
	with open(file_path, encoding='utf8') as file:
		data = YAML(typ='safe').load(file)
	return data if isinstance(data, dict) else None


def degradation_levels(cfg: ExperimentConfig, count: int, rng: np.random.Generator) -> List[Tuple[Optional[float], float]]:
	"""
	(blur width, noise level) of every pre-training sample. A blur width of None keeps the task operator
	"""
	settings = cfg.pretraining
	if settings.degradation == 'fixed':
		return [(None, cfg.noise_p)] * count
	if cfg.task == 'deblur':
		return [(float(kappa), settings.random_blur_noise_p) for kappa in rng.uniform(*settings.blur_kappa_range, size=count)]
	return [(None, float(p)) for p in rng.uniform(*settings.noise_p_range, size=count)]


def pretraining_dataset(cfg: ExperimentConfig, op: LinearOperator, geometry: Optional[ParallelBeamGeometry]) -> List[PretrainSample]:
	"""
	Generated phantoms, or every PGM image of the configured directory, paired with the network inputs of their own
	noisy simulated measurements
	"""
	settings = cfg.pretraining
	if settings.image_directory is not None:
		paths = file_util.list_file_with_suffix(settings.image_directory, '.pgm')
		if len(paths) == 0:
			raise ConfigError('No PGM image found in {}'.format(settings.image_directory))
		ground_truths = [Image.load_pgm(path) for path in paths]
		for path, image in zip(paths, ground_truths):
			if image.shape != op.image_shape:
				raise ConfigError('Pre-training image {} is {}x{}, expected {}x{}'.format(path, *image.shape, *op.image_shape))
	else:
		ground_truths = phantoms.generate(settings.phantom, settings.dataset_size)
	root = np.random.SeedSequence(settings.seed)
	children = root.spawn(len(ground_truths))
	levels = degradation_levels(cfg, len(ground_truths), np.random.default_rng(root.spawn(1)[0]))
	if settings.degradation == 'random' and len(levels) > 0:
		get_logger().info('Pre-training samples with randomised degradation, noise levels {:.3g} to {:.3g}'.format(min(p for _, p in levels), max(p for _, p in levels)))
	inputs = []
	for gt, child, (kappa, p) in zip(ground_truths, children, levels):
		sample_op = op if kappa is None else gaussian_blur_operator(kappa, *op.image_shape)
		inputs.append(simulate(sample_op, geometry, gt, p, int(child.generate_state(1)[0]))[1])
	return build_dataset(ground_truths, inputs)


def network_layout(cfg: ExperimentConfig) -> ParamLayout:
	return layout_of(UNet(cfg.network))


def ensure_pretrained(cfg: ExperimentConfig, op: LinearOperator, geometry: Optional[ParallelBeamGeometry], *, force: bool = False) -> PretrainArtifacts:
	"""
	Reuse the pre-training of the configured directory if it was made with the same settings, otherwise run it
	"""
	logger = get_logger()
	directory = cfg.pretraining_directory()
	fingerprint = pretraining_fingerprint(cfg)
	manifest_path = os.path.join(directory, PRETRAIN_MANIFEST)
	trajectory_directory = os.path.join(directory, TRAJECTORY_DIRECTORY)
	manifest = _read_yaml(manifest_path)
	if not force and manifest is not None and manifest.get('fingerprint') == fingerprint:
		store = TrajectoryStore.open(trajectory_directory)
		theta_pre = ParamVector.load(os.path.join(directory, THETA_PRE_FILE), store.layout)
		logger.info('Reusing pre-training in {} ({} checkpoints)'.format(directory, len(store)))
		return PretrainArtifacts(theta_pre, store, fingerprint)

	if os.path.isfile(manifest_path):
		os.remove(manifest_path)
	if os.path.isdir(trajectory_directory):
		shutil.rmtree(trajectory_directory)
	dataset = pretraining_dataset(cfg, op, geometry)
	logger.info('Pre-training on {} samples for {} epochs into {}'.format(len(dataset), cfg.pretraining.epochs, directory))
	store = TrajectoryStore(network_layout(cfg), trajectory_directory)
	settings = cfg.pretraining
	result = pretrain(
		cfg.network, dataset,
		epochs=settings.epochs, d_pre=cfg.subspace.d_pre, seed=settings.seed,
		lr=settings.lr, batch_size=settings.batch_size, store=store
	)
	result.theta_pre.save(os.path.join(directory, THETA_PRE_FILE))
	# the manifest goes last, an interrupted pre-training is never reused
	with file_util.safe_write(manifest_path, encoding='utf8') as file:
		YAML().dump({
			'fingerprint': fingerprint,
			'samples': len(dataset),
			'epochs': settings.epochs,
			'checkpoints': len(result.store),
			'stride': result.store.stride,
			'epoch_losses': [float(v) for v in result.epoch_losses],
		}, file)
	return PretrainArtifacts(result.theta_pre, result.store, fingerprint)


# ------------------------
#   Subspace extraction
# ------------------------

def extract_basis(cfg: ExperimentConfig, store: TrajectoryStore) -> SvdResult:
	settings = cfg.subspace
	if settings.basis == 'svd':
		return batch_svd(store, settings.d_sub)
	if settings.basis == 'incremental':
		return incremental_svd(iter(store), settings.d_sub, settings.incremental_buffer)
	return random_basis(store.d_theta, settings.d_sub, settings.random_seed, orthonormal=settings.basis == 'random_orthonormal')


def subspace_fingerprint(cfg: ExperimentConfig, pretrained: PretrainArtifacts) -> str:
	settings = cfg.subspace.serialize()
	settings.pop('directory')
	return _fingerprint(pretrained.fingerprint, settings)


def ensure_subspace(cfg: ExperimentConfig, pretrained: PretrainArtifacts, *, force: bool = False) -> ExtractedSubspace:
	logger = get_logger()
	directory = cfg.subspace_directory()
	fingerprint = subspace_fingerprint(cfg, pretrained)
	run_path = os.path.join(directory, SUBSPACE_RUN_FILE)
	record = _read_yaml(run_path)
	if not force and record is not None and record.get('fingerprint') == fingerprint:
		model = SubspaceModel.load(directory, pretrained.theta_pre.layout)
		logger.info('Reusing subspace in {}: {}'.format(directory, model))
		return ExtractedSubspace(model, int(record.get('peak_bytes', 0)))

	if os.path.isfile(run_path):
		os.remove(run_path)
	svd = extract_basis(cfg, pretrained.store)
	d_lev = d_lev_from_fraction(pretrained.theta_pre.size, cfg.subspace.d_lev_fraction)
	model = build_subspace_model(pretrained.theta_pre, svd, d_lev)
	model.save(directory)
	with file_util.safe_write(run_path, encoding='utf8') as file:
		YAML().dump({
			'fingerprint': fingerprint,
			'basis': cfg.subspace.basis,
			'rank_deficient': bool(svd.rank_deficient),
			'peak_bytes': int(svd.peak_bytes),
		}, file)
	logger.info('Extracted {} subspace into {}: {}'.format(cfg.subspace.basis, directory, model))
	return ExtractedSubspace(model, svd.peak_bytes)


# ------------------------
#   Reconstruction
# ------------------------

class RunMonitor:
	"""
	The step callback of a reconstruction: evaluates the image, extends the trace and feeds the stopping rule
	"""
	def __init__(self, problem: NetworkObjective, ground_truth: Image, stopper: EarlyStopper, trace: List[TraceRow], stopwatch: misc_util.Stopwatch, log_interval: int = 100):
		self.problem = problem
		self.ground_truth = ground_truth
		self.stopper = stopper
		self.trace = trace
		self.stopwatch = stopwatch
		self.log_interval = log_interval
		self.tracker = PsnrTracker()
		self.accepted_image: Optional[np.ndarray] = None
		self.best_image: Optional[np.ndarray] = None
		self.last_image: Optional[np.ndarray] = None

	def __call__(self, step: int, x: np.ndarray, loss: float) -> bool:
		image = self.problem.image(x)
		raw = psnr(image, self.ground_truth)
		if len(self.tracker) == 0 or raw > max(self.tracker.raw_psnr_history):
			self.best_image = image
		self.tracker.track(loss, raw)
		self.trace.append(TraceRow(step, self.stopwatch.elapsed(), float(loss), raw, self.tracker.min_loss_psnr_history[-1]))
		previous = self.stopper.stop_index
		keep_going = self.stopper.observe(loss, image if self.stopper.needs_image else None)
		if self.stopper.stop_index != previous:
			self.accepted_image = image
		self.last_image = image
		if step % self.log_interval == 0:
			get_logger().info('Step {}: loss {:.6g}, PSNR {:.2f} dB (min-loss {:.2f} dB)'.format(step, loss, raw, self.tracker.min_loss_psnr_history[-1]))
		return keep_going

	def conv_image(self) -> Optional[np.ndarray]:
		if self.stopper.fired and self.accepted_image is not None:
			return self.accepted_image
		return self.last_image


def build_problem(cfg: ExperimentConfig, setup: TaskSetup, subspace: Optional[SubspaceModel]) -> NetworkObjective:
	evaluator = NetworkEvaluator(cfg.network, NetworkInput(setup.network_input))
	objective = ObjectiveConfig(tv_weight=cfg.tv_weight())
	if subspace is not None:
		return SubspaceObjective(evaluator, subspace, setup.op, setup.measurement, objective)
	return FullParameterObjective(evaluator, setup.op, setup.measurement, objective)


def start_point(cfg: ExperimentConfig, seeds: RunSeeds, pretrained: Optional[PretrainArtifacts]) -> np.ndarray:
	"""
	Random unit coefficients for Sub-DIP, theta_pre for E-DIP and a random initialisation for DIP
	"""
	if cfg.method == 'sub_dip':
		return init_coefficients(cfg.subspace.d_sub, seeds.init)
	if cfg.method == 'edip':
		return pretrained.theta_pre.data.copy()
	return init_params(cfg.network, seeds.init).data


def optimise(cfg: ExperimentConfig, problem: NetworkObjective, x_start: np.ndarray, seeds: RunSeeds, callback: RunMonitor) -> OptimResult:
	settings = cfg.optimizer
	if settings.kind == 'ngd':
		return ngd_run(problem, x_start, settings.ngd, max_steps=settings.max_steps, seed=seeds.probes, callback=callback)
	if settings.kind == 'lbfgs':
		return lbfgs_run(problem, x_start, settings.lbfgs, max_steps=settings.max_steps, callback=callback)
	return adam_run(problem, x_start, cfg.adam_lr(), max_steps=settings.max_steps, callback=callback)


def _record_memory(report: RunReport, stage: str):
	rss = misc_util.resident_memory_bytes()
	report.peak_rss_bytes = max(report.peak_rss_bytes, rss)
	get_logger().debug('Resident memory after {}: {}'.format(stage, misc_util.format_bytes(rss)), option=DebugOption.HARNESS)


def save_config_snapshot(cfg: ExperimentConfig, directory: str):
	file_util.touch_directory(directory)
	with file_util.safe_write(os.path.join(directory, CONFIG_SNAPSHOT_FILE), encoding='utf8') as file:
		YAML().dump(cfg.serialize(), file)


def run_pipeline(cfg: ExperimentConfig, *, run_directory: Optional[str] = None) -> RunReport:
	"""
	Run every stage of one experiment. A stage failure does not raise: the partial report is saved with the failed
	stage, the failure message and the exit code set
	"""
	logger = get_logger()
	run_directory = run_directory if run_directory is not None else cfg.output_directory
	logger.set_debug_options(cfg.debug)
	logger.set_file(run_directory)
	report = RunReport(cfg.name, run_directory)
	stopwatch = misc_util.Stopwatch()
	seeds = cfg.run_seeds()
	stage = 'setup'
	try:
		logger.info('Running {} ({} with {}, {}) into {}'.format(cfg.name, cfg.method, cfg.optimizer.kind, seeds, run_directory))
		save_config_snapshot(cfg, run_directory)
		setup = build_task(cfg, seeds)
		report.header.update({
			'task': cfg.task,
			'method': cfg.method,
			'optimizer': cfg.optimizer.kind,
			'seed': cfg.seed,
			'phantom_seed': cfg.phantom.seed,
			'image_size': cfg.image_size,
			'd_y': setup.op.d_y,
			'n_angles': cfg.geometry.n_angles if cfg.task == 'ct' else None,
			'n_detectors': cfg.geometry.n_detectors if cfg.task == 'ct' else None,
			'd_theta': cfg.network.parameter_count(),
		})
		if cfg.save_images:
			setup.ground_truth.save_sdip(os.path.join(run_directory, 'ground_truth.sdip'))
			setup.ground_truth.save_pgm(os.path.join(run_directory, 'ground_truth.pgm'))
			setup.network_input.save_sdip(os.path.join(run_directory, 'network_input.sdip'))
			setup.measurement.save_sdip(os.path.join(run_directory, 'measurement.sdip'))
		_record_memory(report, stage)

		pretrained = None
		if cfg.method in ('sub_dip', 'edip'):
			stage = 'pretrain'
			pretrained = ensure_pretrained(cfg, setup.op, setup.geometry)
			report.header['d_pre'] = len(pretrained.store)
			_record_memory(report, stage)

		subspace = None
		if cfg.method == 'sub_dip':
			stage = 'extract'
			extracted = ensure_subspace(cfg, pretrained)
			subspace = extracted.model
			report.svd_peak_bytes = extracted.peak_bytes
			report.header.update({'d_sub': subspace.d_sub, 'd_lev': subspace.d_lev, 'basis': cfg.subspace.basis})
			_record_memory(report, stage)

		stage = 'reconstruct'
		problem = build_problem(cfg, setup, subspace)
		stopper = EarlyStopper.from_config(cfg.stop, cfg.subspace_method)
		report.stop_rule = stopper.kind
		monitor = RunMonitor(problem, setup.ground_truth, stopper, report.trace, misc_util.Stopwatch())
		try:
			result = optimise(cfg, problem, start_point(cfg, seeds, pretrained), seeds, monitor)
			report.termination = result.termination.name
			if cfg.save_images:
				sdip_format.write(os.path.join(run_directory, FINAL_ITERATE_FILE), result.x)
		finally:
			report.stop_fired = stopper.fired
			report.stop_index = stopper.stop_index
			h, w = setup.op.image_shape
			conv = monitor.conv_image()
			report.conv_image = Image(conv.reshape(h, w)) if conv is not None else None
			report.best_image = Image(monitor.best_image.reshape(h, w)) if monitor.best_image is not None else None
		_record_memory(report, stage)
		logger.info('Finished {}: {}'.format(cfg.name, report))
	except CONFIG_FAILURES as e:
		logger.error('Stage {} failed: {}'.format(stage, e))
		report.fail(stage, e, core_constant.EXIT_CONFIG_ERROR)
	except NumericalFailure as e:
		logger.error('Stage {} failed: {}'.format(stage, e))
		report.fail(stage, e, core_constant.EXIT_NUMERICAL_FAILURE)
	except Exception as e:
		logger.exception('Stage {} failed unexpectedly'.format(stage))
		report.fail(stage, e, core_constant.EXIT_RUNTIME_ERROR)
	finally:
		report.total_time_s = stopwatch.elapsed()
		try:
			report.save(run_directory, images=cfg.save_images)
		except OSError as e:
			logger.error('Failed to save the report into {}: {}'.format(run_directory, e))
			if report.complete:
				report.fail('report', e, core_constant.EXIT_RUNTIME_ERROR)
		logger.unset_file()
	return report


def run_pretraining(cfg: ExperimentConfig, *, force: bool = True) -> PretrainArtifacts:
	op, geometry = build_operator(cfg)
	return ensure_pretrained(cfg, op, geometry, force=force)


def run_extraction(cfg: ExperimentConfig, *, force: bool = True) -> ExtractedSubspace:
	"""
	Extract the subspace, pre-training first if no matching pre-training is available
	"""
	op, geometry = build_operator(cfg)
	pretrained = ensure_pretrained(cfg, op, geometry)
	return ensure_subspace(cfg, pretrained, force=force)
