#!/usr/bin/env python3
"""
AMR Toolkit - Startup Script

Checks the environment and then hands every remaining argument to the
amr-toolkit command line:
1. Checks the Python version and the numerical stack
2. Optionally installs requirements.txt
3. Creates .env from .env.example when missing
4. Runs the requested amr-toolkit command

Usage:
    python start.py [--install] [--skip-checks] -- evaluate --datasets datasets/sample.conf
"""

import argparse
import importlib
import shutil
import subprocess
import sys
from pathlib import Path


ROOT = Path(__file__).parent

REQUIRED_MODULES = {
    "numpy": "numpy",
    "pandas": "pandas",
    "sklearn": "scikit-learn",
    "pydantic": "pydantic",
    "dotenv": "python-dotenv",
    "pythonjsonlogger": "python-json-logger",
    "tenacity": "tenacity",
}


class Colors:
    """Terminal colors for better output"""
    HEADER = '\033[95m'
    BLUE = '\033[94m'
    GREEN = '\033[92m'
    WARNING = '\033[93m'
    FAIL = '\033[91m'
    ENDC = '\033[0m'
    BOLD = '\033[1m'


def print_banner():
    banner = f"""
{Colors.BLUE}{Colors.BOLD}
╔══════════════════════════════════════════════════════════╗
║                                                          ║
║            ARITHMETIC METHOD REGRESSION TOOLKIT          ║
║                                                          ║
║     Equal-share solver, AMR + k-NN, LOOCV benchmarks     ║
║                                                          ║
╚══════════════════════════════════════════════════════════╝
{Colors.ENDC}
    """
    print(banner, file=sys.stderr)


def check_requirements():
    """Check interpreter version and importable dependencies"""
    print(f"{Colors.HEADER}🔍 Checking System Requirements...{Colors.ENDC}", file=sys.stderr)

    if sys.version_info < (3, 9):
        print(f"{Colors.FAIL}❌ Python 3.9+ required. Current: {sys.version}{Colors.ENDC}", file=sys.stderr)
        return False
    print(f"{Colors.GREEN}✅ Python {sys.version.split()[0]}{Colors.ENDC}", file=sys.stderr)

    missing = []
    for module, package in REQUIRED_MODULES.items():
        try:
            importlib.import_module(module)
        except ImportError:
            missing.append(package)
    if missing:
        print(f"{Colors.FAIL}❌ Missing packages: {', '.join(missing)} (run with --install){Colors.ENDC}",
              file=sys.stderr)
        return False

    print(f"{Colors.GREEN}✅ Numerical stack available{Colors.ENDC}", file=sys.stderr)
    return True


def setup_environment():
    """Install requirements.txt into the current interpreter"""
    print(f"{Colors.BLUE}📦 Installing Python dependencies...{Colors.ENDC}", file=sys.stderr)
    try:
        subprocess.run([sys.executable, "-m", "pip", "install", "-r", str(ROOT / "requirements.txt")], check=True)
    except subprocess.CalledProcessError as e:
        print(f"{Colors.FAIL}❌ Failed to install Python dependencies: {e}{Colors.ENDC}", file=sys.stderr)
        return False
    print(f"{Colors.GREEN}✅ Python dependencies installed{Colors.ENDC}", file=sys.stderr)
    return True


def check_env_file():
    """Create .env from the template; every key is optional so a missing template is fine"""
    env_file = ROOT / ".env"
    env_example = ROOT / ".env.example"
    if not env_file.exists() and env_example.exists():
        shutil.copyfile(env_example, env_file)
        print(f"{Colors.WARNING}⚠️  .env created from .env.example{Colors.ENDC}", file=sys.stderr)


def main():
    parser = argparse.ArgumentParser(description="AMR toolkit startup script")
    parser.add_argument("--install", action="store_true", help="install requirements.txt first")
    parser.add_argument("--skip-checks", action="store_true", help="skip the requirement check")
    parser.add_argument("--quiet", action="store_true", help="no banner")
    args, command = parser.parse_known_args()
    if command and command[0] == "--":
        command = command[1:]

    if not args.quiet:
        print_banner()

    if args.install and not setup_environment():
        sys.exit(1)
    if not args.skip_checks and not check_requirements():
        print(f"{Colors.FAIL}❌ System requirements not met{Colors.ENDC}", file=sys.stderr)
        sys.exit(1)
    check_env_file()

    if not command:
        command = ["--help"]

    from amr_toolkit.main import main as toolkit_main
    sys.exit(toolkit_main(command))


if __name__ == "__main__":
    main()
