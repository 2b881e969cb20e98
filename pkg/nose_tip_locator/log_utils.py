import sys

from colorama import Fore, Style, init

init(autoreset=True)


def log_error(message):
    """Log an error in red; the caller decides the exit status."""
    print(f"{Fore.RED}[ERROR]{Fore.WHITE} {message}", file=sys.stderr)


def bright_text(text):
    """Returns the text formatted in bright style."""
    return f"{Style.BRIGHT}{Fore.WHITE}{text}{Style.RESET_ALL}"


def bright_magenta_text(text):
    return f"{Style.BRIGHT}{Fore.MAGENTA}{text}{Style.RESET_ALL}"


def yellow_text(text):
    return f"{Fore.YELLOW}{text}{Style.RESET_ALL}"


def green_text(text):
    return f"{Fore.GREEN}{text}{Style.RESET_ALL}"


def red_text(text):
    return f"{Fore.RED}{text}{Style.RESET_ALL}"


def cyan_text(text):
    return f"{Fore.CYAN}{text}{Style.RESET_ALL}"


def magenta_text(text):
    return f"{Fore.MAGENTA}{text}{Style.RESET_ALL}"


def blue_text(text):
    return f"{Fore.BLUE}{text}{Style.RESET_ALL}"


def log_stage_failure(stage: str, error: Exception):
    """Report which pipeline stage failed and why."""
    log_error(f"{bright_text(stage)}: {error}")


def log_written(kind: str, path: str):
    """Print a line for every output file that was written."""
    print(f"{cyan_text(kind)}: {blue_text(path)}")


def log_detect_summary(landmark, smoothed: bool, iterations: int, pose=None):
    """One-line result of the detect command."""
    mode = f"smoothed x{iterations}" if smoothed else "unsmoothed"
    line = (
        f"{green_text('nose tip')} row={bright_text(landmark.row)} col={bright_text(landmark.col)} "
        f"xyz=({landmark.point.x:g}, {landmark.point.y:g}, {landmark.point.z:g}) "
        f"score={landmark.score:g} [{magenta_text(mode)}]"
    )
    if pose is not None:
        line += f" pose={yellow_text(pose.label())}"
    print(line)


def log_truth_check(distance: float, tolerance: float):
    """Report whether the detection falls within tolerance of a ground-truth landmark."""
    verdict = green_text("within tolerance") if distance <= tolerance else red_text("outside tolerance")
    print(f"distance to truth: {bright_text(f'{distance:.2f}')} px ({verdict}, tolerance {tolerance:g} px)")


def log_synth_summary(depth_map, truth, pose_label: str):
    print(
        f"{green_text('synthetic face')} {bright_text(f'{depth_map.width}x{depth_map.height}')} "
        f"pose={yellow_text(pose_label)} valid={depth_map.valid_count()} "
        f"nose=({truth.row}, {truth.col})"
    )


def log_benchmark_summary(report):
    """Prints the per-viewpoint table for both arms and the overall rates."""
    print(
        f"\n{bright_text('Nose-tip localisation benchmark')}"
        f"\n==============================================================="
    )
    for line in report.header_lines():
        print(f"  {line}")

    for arm in ("unsmoothed", "smoothed"):
        print(f"\n{bright_magenta_text(arm)}")
        print(f"{'viewpoint':<12}{'count':>8}{'correct':>9}{'success%':>10}{'failure%':>10}")
        for bucket in report.buckets:
            total, correct = bucket.total(arm), bucket.correct(arm)
            success, failure = bucket.percentages(arm)
            colour = green_text if correct == total else yellow_text
            print(
                f"{bucket.label:<12}{total:>8}{correct:>9}"
                f"{colour(f'{success:>10.2f}')}{failure:>10.2f}"
            )

    print()
    for arm in ("unsmoothed", "smoothed"):
        correct, total = report.overall(arm)
        print(f"{arm + ' overall:':<22}{bright_text(f'{correct}/{total}')} ({report.overall_success(arm):.2f}%)")
    print("\n")
