import os

import pytest

from dfi_runtime.interpreter import interpret
from dfi_runtime.report import RunMode
from harness.corpus import load_corpus
from harness.pipeline import load_program
from minic.ast_nodes import SourceProgram
from vfa.analysis import analyze

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS_DIR = os.path.join(ROOT, "files", "corpus")
GOLDEN_LAYOUTS = os.path.join(ROOT, "files", "golden", "layouts.json")
PROGRAMS_DIR = os.path.join(ROOT, "files", "programs")


def build(text: str, path: str = "<test>"):
    """解析, 类型检查并降级一段 MiniC 源码"""
    return load_program(SourceProgram(text, path))


def run(text: str, mode: RunMode = RunMode.PROTECTED, inputs=None, strict_init: bool = False, **kwargs):
    loaded = build(text)
    tables = analyze(loaded.ir, strict_init=strict_init).tables if mode.checks else None
    return interpret(loaded.ir, tables, mode, inputs, **kwargs)


def corpus_source(name: str) -> str:
    with open(os.path.join(CORPUS_DIR, name), "r", encoding="utf-8") as f:
        return f.read()


def program_source(name: str) -> str:
    with open(os.path.join(PROGRAMS_DIR, name), "r", encoding="utf-8") as f:
        return f.read()


def expected_prints(text: str):
    """从 ``// prints: 1 2 3`` 首行读取预期输出"""
    for line in text.splitlines():
        if line.startswith("// prints:"):
            return [int(v) for v in line[len("// prints:") :].split()]
    return None


def shared_programs():
    """
    files/programs 中的程序及全部良性语料用例, 每项为 (名称, 源码, 输入, 预期输出或 None)
    """
    items = []
    for name in sorted(os.listdir(PROGRAMS_DIR)):
        if name.endswith(".c"):
            text = program_source(name)
            items.append((name, text, {}, expected_prints(text)))
    cases, _ = load_corpus(CORPUS_DIR)
    for case in cases:
        if not case.category.is_attack:
            items.append((case.id, corpus_source(os.path.basename(case.source)), case.inputs, None))
    return items


@pytest.fixture
def corpus_dir() -> str:
    return CORPUS_DIR


@pytest.fixture
def flagship_source() -> str:
    return corpus_source("intra_struct_array.c")
