# cli/app.py
# =============================================================================
"""Command-line surface: synth -> build-dataset -> featurize -> train -> predict -> evaluate."""
import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from cli.manifest import RunManifest, manifest_path
from config.settings import Config
from dataset import dataset_files
from dataset.dataset_builder import DatasetConfig
from document_processing.document_loader import DocumentLoader
from evaluation.evaluator import Prediction, evaluate, parse_metrics, rank_predictions
from experiments.pipeline import build_dataset, featurize, predict, train_model
from experiments.runner import COMPARISONS, ExperimentRunner
from knowledge_base.snapshot import load_snapshot_file, write_facts_tsv
from knowledge_base.vocabulary import EntityVocab, TypeVocab
from models.model_io import read_model, write_model
from synthetic.corpus_generator import CorpusGenerator, SynthConfig
from training.train_config import TrainConfig
from utils.exceptions import (DataError, DomainError, InputError, KBCError, NumericalError, ParseError,
                              UsageError)
from utils.helpers import FileUtils, SystemUtils, format_number
from vector_store.feature_store import read_feature_matrix, write_feature_matrix
from vector_store.sparse import BLOCK_ORDER

logger = logging.getLogger(__name__)

# flags only meaningful for some algorithms
ALGO_ONLY_FLAGS = {
    "C": ("linear.dcd",),
    "tolerance": ("linear.dcd",),
    "max_sweeps": ("linear.dcd",),
    "learning_rate": ("linear.adagrad", "embedding"),
    "epsilon": ("linear.adagrad", "embedding"),
    "dim": ("embedding",),
}


def command_defaults(command: str) -> dict:
    common = {"seed": Config.SEED, "threads": Config.THREADS, "log_level": Config.LOG_LEVEL, "config": None}
    training = {
        "algo": Config.ALGORITHM, "m": Config.NUM_NEGATIVE_ENTITIES, "n": Config.NUM_NEGATIVE_TYPES,
        "epochs": Config.EPOCHS, "learning_rate": Config.LEARNING_RATE, "epsilon": Config.ADAGRAD_EPSILON,
        "C": Config.REGULARIZATION_C, "tolerance": Config.DCD_TOLERANCE, "max_sweeps": Config.DCD_MAX_SWEEPS,
        "dim": Config.EMBEDDING_DIM, "fixed_negatives": False,
    }
    specific = {
        "synth": {"out_dir": None, "entities": 10000, "types": 50, "clusters": 40, "missing_rate": 0.2},
        "build-dataset": {
            "train_snapshot": None, "test_snapshot": None, "out_dir": None, "num_types": Config.NUM_TYPES,
            "extra_negative_fraction": Config.EXTRA_NEGATIVE_FRACTION, "exclude_types": "",
        },
        "featurize": {
            "dataset_dir": None, "train_snapshot": None, "description_corpus": None, "wiki_corpus": None,
            "blocks": ",".join(Config.FEATURE_BLOCKS), "min_df": Config.MIN_DF, "out": None,
        },
        "train": {"dataset_dir": None, "features": None, "out": None, **training},
        "predict": {"model": None, "features": None, "dataset_dir": None, "candidates": None,
                    "top_k": None, "out": None},
        "evaluate": {"predictions": None, "test_set": None, "out": None,
                     "metrics": ",".join(Config.METRICS), "gak_norm": Config.GAK_NORM},
        "experiment": {
            "out": None, "entities": 2000, "types": 20, "clusters": 16, "missing_rate": 0.2,
            "num_types": 20, "seeds": "0,1,2,3,4", "comparison": "objectives", "blocks": "D,W",
            "extra_negative_fraction": Config.EXTRA_NEGATIVE_FRACTION, "min_df": Config.MIN_DF, **training,
        },
        "replay": {"manifest": None},
    }
    return {**common, **specific[command]}


REQUIRED = {
    "synth": ("out_dir",),
    "build-dataset": ("train_snapshot", "test_snapshot", "out_dir"),
    "featurize": ("dataset_dir", "train_snapshot", "out"),
    "train": ("dataset_dir", "features", "out"),
    "predict": ("model", "features", "out"),
    "evaluate": ("predictions", "test_set"),
    "experiment": ("out",),
    "replay": ("manifest",),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class KBCCommandLine:
    """Main CLI class for the KB completion toolkit"""

    def __init__(self):
        self.config = Config()
        self.commands = {
            "synth": self.cmd_synth,
            "build-dataset": self.cmd_build_dataset,
            "featurize": self.cmd_featurize,
            "train": self.cmd_train,
            "predict": self.cmd_predict,
            "evaluate": self.cmd_evaluate,
            "experiment": self.cmd_experiment,
            "replay": self.cmd_replay,
        }
        self.parser = self.build_parser()

    # ------------------------------------------------------------------ parsing

    def build_parser(self) -> argparse.ArgumentParser:
        common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
        common.add_argument("--seed", type=int, help="random seed (overrides KBC_SEED)")
        common.add_argument("--config", help="flat JSON file of flag values")
        common.add_argument("--threads", type=int, help="worker cap for parallel-safe stages")
        common.add_argument("--log-level", dest="log_level")

        parser = _Parser(prog="kbc", description="Entity type completion for knowledge bases")
        sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

        def add(name, help_text):
            return sub.add_parser(name, help=help_text, parents=[common], argument_default=argparse.SUPPRESS)

        p = add("synth", "generate a synthetic snapshot pair with text corpora")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--entities", type=int)
        p.add_argument("--types", type=int)
        p.add_argument("--clusters", type=int)
        p.add_argument("--missing-rate", dest="missing_rate", type=float)

        p = add("build-dataset", "build train positives and the labeled test set")
        p.add_argument("--train-snapshot", dest="train_snapshot")
        p.add_argument("--test-snapshot", dest="test_snapshot")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--num-types", dest="num_types", type=int)
        p.add_argument("--extra-negative-fraction", dest="extra_negative_fraction", type=float)
        p.add_argument("--exclude-types", dest="exclude_types", help="comma-separated type symbols")

        p = add("featurize", "build the entity feature matrix")
        p.add_argument("--dataset-dir", dest="dataset_dir")
        p.add_argument("--train-snapshot", dest="train_snapshot")
        p.add_argument("--description-corpus", dest="description_corpus")
        p.add_argument("--wiki-corpus", dest="wiki_corpus")
        p.add_argument("--blocks", help="comma-separated subset of T,D,W")
        p.add_argument("--min-df", dest="min_df", type=int)
        p.add_argument("--out")

        p = add("train", "train a ranking model")
        p.add_argument("--dataset-dir", dest="dataset_dir")
        p.add_argument("--features")
        p.add_argument("--out")
        self._add_training_flags(p)

        p = add("predict", "score candidate entity-type pairs")
        p.add_argument("--model")
        p.add_argument("--features")
        p.add_argument("--dataset-dir", dest="dataset_dir")
        p.add_argument("--candidates", help="TSV of entity<TAB>type; defaults to the test set")
        p.add_argument("--top-k", dest="top_k", type=int)
        p.add_argument("--out")

        p = add("evaluate", "compute MAP, GAP and G@k")
        p.add_argument("--predictions")
        p.add_argument("--test-set", dest="test_set")
        p.add_argument("--out")
        p.add_argument("--metrics")
        p.add_argument("--gak-norm", dest="gak_norm", choices=("window", "global"))

        p = add("experiment", "seed-averaged comparisons on synthetic corpora")
        p.add_argument("--out")
        p.add_argument("--entities", type=int)
        p.add_argument("--types", type=int)
        p.add_argument("--clusters", type=int)
        p.add_argument("--missing-rate", dest="missing_rate", type=float)
        p.add_argument("--num-types", dest="num_types", type=int)
        p.add_argument("--seeds", help="comma-separated seeds")
        p.add_argument("--comparison", choices=COMPARISONS)
        p.add_argument("--blocks")
        p.add_argument("--extra-negative-fraction", dest="extra_negative_fraction", type=float)
        p.add_argument("--min-df", dest="min_df", type=int)
        self._add_training_flags(p)

        p = add("replay", "re-run the command recorded in a manifest and compare digests")
        p.add_argument("--manifest")
        return parser

    @staticmethod
    def _add_training_flags(p) -> None:
        p.add_argument("--algo", choices=Config.ALGORITHMS)
        p.add_argument("--m", type=int, help="negative entities per positive")
        p.add_argument("--n", type=int, help="negative types per positive")
        p.add_argument("--epochs", type=int)
        p.add_argument("--learning-rate", dest="learning_rate", type=float)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--C", dest="C", type=float)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--max-sweeps", dest="max_sweeps", type=int)
        p.add_argument("--dim", type=int)
        p.add_argument("--fixed-negatives", dest="fixed_negatives", action="store_true")

    def parse(self, argv: List[str]) -> Tuple[str, dict, set]:
        """Resolve flags: explicit > --config JSON > environment > defaults"""
        namespace = vars(self.parser.parse_args(argv))
        command = namespace.pop("command")
        defaults = command_defaults(command)
        from_file = {}
        if namespace.get("config"):
            with open(namespace["config"], "r", encoding="utf-8") as f:
                try:
                    raw = json.load(f)
                except json.JSONDecodeError as e:
                    raise UsageError(f"--config is not valid JSON: {e}") from None
            if not isinstance(raw, dict):
                raise UsageError("--config must hold a flat JSON object")
            from_file = {key.lstrip("-").replace("-", "_"): value for key, value in raw.items()}
            unknown = sorted(set(from_file) - set(defaults))
            if unknown:
                raise UsageError(f"unknown keys in --config for {command}: {unknown}")
        flags = {**defaults, **from_file, **namespace}
        missing = [name for name in REQUIRED[command] if flags.get(name) in (None, "")]
        if missing:
            raise UsageError(f"{command}: missing required flags {['--' + m.replace('_', '-') for m in missing]}")
        return command, flags, set(from_file) | set(namespace)

    # ---------------------------------------------------------------- execution

    def run(self, argv: Optional[List[str]] = None) -> int:
        try:
            command, flags, explicit = self.parse(sys.argv[1:] if argv is None else argv)
            Config.setup_logging(flags["log_level"])
            self.check_algorithm_flags(command, flags, explicit)
            self.execute(command, flags)
            return 0
        except KBCError as e:
            print(f"error: {e}", file=sys.stderr)
            return e.exit_code
        except (FileNotFoundError, IsADirectoryError, PermissionError) as e:
            print(f"error: {e}", file=sys.stderr)
            return DataError.exit_code

    @staticmethod
    def check_algorithm_flags(command: str, flags: dict, explicit: set) -> None:
        if "algo" not in flags:
            return
        for name, algorithms in ALGO_ONLY_FLAGS.items():
            if name in explicit and flags["algo"] not in algorithms:
                raise UsageError(f"--{name.replace('_', '-')} does not apply to --algo {flags['algo']}")

    def execute(self, command: str, flags: dict) -> RunManifest:
        start = time.perf_counter()
        inputs, outputs, target = self.commands[command](flags)
        manifest = RunManifest(
            command=command,
            flags=flags,
            seed=flags["seed"],
            input_digests=RunManifest.digest_files(inputs),
            output_digests=RunManifest.digest_files(outputs),
            duration_seconds=round(time.perf_counter() - start, 3),
        )
        manifest.record_system()
        if target is not None:
            manifest.write(target)
        logger.info("%s finished in %.1fs", command, manifest.duration_seconds)
        return manifest

    @staticmethod
    def _train_config(flags: dict) -> TrainConfig:
        return TrainConfig(
            algorithm=flags["algo"], C=flags["C"], learning_rate=flags["learning_rate"],
            adagrad_epsilon=flags["epsilon"], epochs=flags["epochs"], m=flags["m"], n=flags["n"],
            seed=flags["seed"], resample_negatives=not flags["fixed_negatives"],
            tolerance=flags["tolerance"], max_sweeps=flags["max_sweeps"], dim=flags["dim"],
        )

    @staticmethod
    def _blocks(spec: str) -> List[str]:
        blocks = [b.strip().upper() for b in spec.split(",") if b.strip()]
        if not blocks or any(b not in BLOCK_ORDER for b in blocks):
            raise UsageError(f"--blocks must be a non-empty subset of {','.join(BLOCK_ORDER)}, got '{spec}'")
        return blocks

    # ----------------------------------------------------------------- commands

    def cmd_synth(self, flags):
        out_dir = Path(flags["out_dir"])
        cfg = SynthConfig(entities=flags["entities"], types=flags["types"], clusters=flags["clusters"],
                          missing_rate=flags["missing_rate"], seed=flags["seed"])
        outputs = CorpusGenerator(cfg).generate().write(out_dir)
        return [], outputs, out_dir / "manifest.json"

    def cmd_build_dataset(self, flags):
        out_dir = Path(flags["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        entity_vocab, type_vocab = EntityVocab(), TypeVocab()
        train = load_snapshot_file(flags["train_snapshot"], entity_vocab, type_vocab, timestamp_label="train")
        test = load_snapshot_file(flags["test_snapshot"], entity_vocab, type_vocab, timestamp_label="test")
        excluded = [s.strip() for s in (flags["exclude_types"] or "").split(",") if s.strip()]
        cfg = DatasetConfig(
            num_types=flags["num_types"],
            extra_negative_fraction=flags["extra_negative_fraction"],
            seed=flags["seed"],
            exclude_types=frozenset(type_vocab.lookup(s) for s in excluded),
        )
        artifacts = build_dataset(train, test, cfg)
        outputs = [out_dir / name for name in (dataset_files.TRAIN_POSITIVES, dataset_files.TEST_SET,
                                               dataset_files.TYPES, dataset_files.STATS)]
        write_facts_tsv(outputs[0], ((entity_vocab.symbol(e), type_vocab.symbol(t))
                                     for e, t in artifacts.train_positives))
        dataset_files.write_test_set(outputs[1], artifacts.test_examples, entity_vocab, type_vocab)
        dataset_files.write_types(outputs[2], artifacts.types, artifacts.type_counts, type_vocab,
                                  artifacts.stats.test_positives_per_type)
        dataset_files.write_stats(outputs[3], artifacts.stats)
        print(outputs[3].read_text(encoding="utf-8"), end="")
        return [flags["train_snapshot"], flags["test_snapshot"]], outputs, out_dir / "manifest.json"

    def cmd_featurize(self, flags):
        blocks = self._blocks(flags["blocks"])
        corpora = {"D": flags["description_corpus"], "W": flags["wiki_corpus"]}
        for name in ("D", "W"):
            if name in blocks and not corpora[name]:
                flag = "--description-corpus" if name == "D" else "--wiki-corpus"
                raise UsageError(f"block {name} needs {flag}")
        dataset_dir = Path(flags["dataset_dir"])
        entity_vocab, type_vocab = EntityVocab(), TypeVocab()
        train = load_snapshot_file(flags["train_snapshot"], entity_vocab, type_vocab, timestamp_label="train")
        types = [type_vocab.lookup(s) for s in dataset_files.read_types(dataset_dir / dataset_files.TYPES)]
        # test-only entities get rows too; their type block stays empty
        for e, _, _ in dataset_files.read_test_set(dataset_dir / dataset_files.TEST_SET):
            entity_vocab.add(e)

        loader = DocumentLoader()
        documents = {}
        for name in ("D", "W"):
            if name in blocks:
                documents[name] = {entity_vocab.get(s): text
                                   for s, text in loader.load_corpus(corpora[name]) if s in entity_vocab}
        features = featurize(len(entity_vocab), train, types, blocks,
                             documents.get("D"), documents.get("W"), flags["min_df"])
        out = FileUtils.ensure_parent(flags["out"])
        write_feature_matrix(out, features, entity_vocab)
        inputs = [flags["train_snapshot"], dataset_dir / dataset_files.TYPES, dataset_dir / dataset_files.TEST_SET]
        inputs += [corpora[b] for b in ("D", "W") if b in blocks]
        return inputs, [out], manifest_path(out)

    def cmd_train(self, flags):
        cfg = self._train_config(flags)
        features, entity_vocab = read_feature_matrix(flags["features"])
        bundle = dataset_files.DatasetBundle(flags["dataset_dir"], entity_vocab)
        positives = bundle.training_positives()
        model = train_model(positives, features, len(bundle.type_vocab), cfg)
        if not model.is_finite():
            raise NumericalError("trained model has non-finite parameters")
        out = FileUtils.ensure_parent(flags["out"])
        write_model(out, model, bundle.type_vocab.symbols)
        inputs = [flags["features"], Path(flags["dataset_dir"]) / dataset_files.TRAIN_POSITIVES,
                  Path(flags["dataset_dir"]) / dataset_files.TYPES]
        return inputs, [out], manifest_path(out)

    def _candidates(self, flags, entity_vocab, type_vocab) -> List[Prediction]:
        if flags["candidates"]:
            rows = []
            with open(flags["candidates"], "r", encoding="utf-8") as f:
                for line_number, line in enumerate(f, start=1):
                    fields = line.rstrip("\n").split("\t")
                    if not line.strip() or line.startswith("#"):
                        continue
                    if len(fields) not in (2, 3):
                        raise ParseError("expected 'entity<TAB>type'", line_number, Path(flags["candidates"]).name)
                    rows.append((entity_vocab.lookup(fields[0]), type_vocab.lookup(fields[1])))
            return [Prediction(e, t, 0.0, False) for e, t in rows]
        if not flags["dataset_dir"]:
            raise UsageError("predict needs --candidates or --dataset-dir")
        bundle = dataset_files.DatasetBundle(flags["dataset_dir"], entity_vocab)
        if bundle.type_vocab.symbols != type_vocab.symbols:
            raise DomainError("dataset types differ from the types the model was trained on")
        return [Prediction(ex.entity, ex.type, 0.0, ex.label) for ex in bundle.test_examples()]

    def cmd_predict(self, flags):
        model, type_symbols = read_model(flags["model"])
        features, entity_vocab = read_feature_matrix(flags["features"])
        if model.space != features.space:
            raise DomainError(f"feature space mismatch: model {model.space}, features {features.space}")
        type_vocab = TypeVocab(type_symbols)
        candidates = self._candidates(flags, entity_vocab, type_vocab)
        scored = predict(model, features, candidates)
        ranked = rank_predictions(scored)
        if flags["top_k"] is not None:
            if flags["top_k"] < 1:
                raise UsageError("--top-k must be >= 1")
            ranked = ranked[: flags["top_k"]]
        out = FileUtils.ensure_parent(flags["out"])
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            for p in ranked:
                f.write(f"{entity_vocab.symbol(p.entity)}\t{type_symbols[p.type]}\t{format_number(p.score)}\n")
        logger.info("Wrote %d predictions to %s", len(ranked), out)
        inputs = [flags["model"], flags["features"], flags["candidates"] or
                  Path(flags["dataset_dir"]) / dataset_files.TEST_SET]
        return inputs, [out], manifest_path(out)

    def cmd_evaluate(self, flags):
        wants_map, wants_gap, ks = parse_metrics(flags["metrics"])
        entity_vocab, type_vocab = EntityVocab(), TypeVocab()
        gold: Dict[tuple, bool] = {}
        for e, t, label in dataset_files.read_test_set(flags["test_set"]):
            gold[(entity_vocab.add(e), type_vocab.add(t))] = label

        preds, unknown, seen = [], [], set()
        with open(flags["predictions"], "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip() or line.startswith("#"):
                    continue
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 3:
                    raise ParseError("expected 'entity<TAB>type<TAB>score'", line_number,
                                     Path(flags["predictions"]).name)
                key = (entity_vocab.get(fields[0]), type_vocab.get(fields[1]))
                if key not in gold:
                    unknown.append(f"{fields[0]}\t{fields[1]}")
                    continue
                if key in seen:
                    raise InputError(f"duplicate prediction for {fields[0]} {fields[1]}")
                seen.add(key)
                try:
                    score = float(fields[2])
                except ValueError:
                    raise ParseError(f"bad score '{fields[2]}'", line_number, Path(flags["predictions"]).name) from None
                preds.append(Prediction(key[0], key[1], score, gold[key]))
        if unknown:
            raise InputError(f"{len(unknown)} predictions for pairs not in the test set, e.g. {unknown[:10]}")
        if len(preds) < len(gold):
            logger.warning("%d test pairs have no prediction and are left out", len(gold) - len(preds))

        report = evaluate(preds, ks, flags["gak_norm"], SystemUtils.resolve_threads(flags["threads"]))
        payload = json.dumps(report.to_dict(type_vocab.symbols, wants_map, wants_gap), indent=2, sort_keys=True)
        print(payload)
        outputs = []
        if flags["out"]:
            out = FileUtils.ensure_parent(flags["out"])
            out.write_text(payload + "\n", encoding="utf-8")
            outputs.append(out)
        target = manifest_path(outputs[0]) if outputs else None
        return [flags["predictions"], flags["test_set"]], outputs, target

    def cmd_experiment(self, flags):
        try:
            seeds = [int(s) for s in str(flags["seeds"]).split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"--seeds must be comma-separated integers, got '{flags['seeds']}'") from None
        synth = SynthConfig(entities=flags["entities"], types=flags["types"], clusters=flags["clusters"],
                            missing_rate=flags["missing_rate"])
        runner = ExperimentRunner(synth, flags["num_types"], seeds, self._train_config(flags),
                                  flags["extra_negative_fraction"], min_df=flags["min_df"])
        rows = runner.run(flags["comparison"], self._blocks(flags["blocks"]))
        out = FileUtils.ensure_parent(flags["out"])
        payload = json.dumps({"comparison": flags["comparison"], "rows": rows}, indent=2, sort_keys=True)
        out.write_text(payload + "\n", encoding="utf-8")
        print(payload)
        return [], [out], manifest_path(out)

    def cmd_replay(self, flags):
        recorded = RunManifest.read(flags["manifest"])
        if recorded.command == "replay" or recorded.command not in self.commands:
            raise UsageError(f"manifest records a command that cannot be replayed: {recorded.command}")
        rerun = self.execute(recorded.command, recorded.flags)
        mismatched = sorted(path for path, digest in recorded.output_digests.items()
                            if rerun.output_digests.get(path) != digest)
        if mismatched:
            raise DataError(f"replay produced different outputs: {mismatched}")
        logger.info("Replay of %s reproduced %d artifacts", recorded.command, len(recorded.output_digests))
        return [flags["manifest"]], [], None
