#!/usr/bin/env python
# -*- coding: utf-8 -*-
# File: revert_risk_cli.py
#
# Copyright 2024 Revertrisk Maintainers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
#  of this software and associated documentation files (the "Software"), to
#  deal in the Software without restriction, including without limitation the
#  rights to use, copy, modify, merge, publish, distribute, sublicense, and/or
#  sell copies of the Software, and to permit persons to whom the Software is
#  furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in
#  all copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
#  IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
#  FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
#  AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
#  LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING
#  FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
#  DEALINGS IN THE SOFTWARE.
#

"""
Main code for revert_risk_cli.

.. _Google Python Style Guide:
   http://google.github.io/styleguide/pyguide.html

"""
import datetime
import json
import logging

from art import text2art
from terminaltables import AsciiTable

from revertrisk import (COMMANDS,
                        configuration_overrides,
                        exit_code_for,
                        get_arguments,
                        load_configuration,
                        run_with_spinner,
                        setup_logging)
from revertrisk.entities import StageLedger
from revertrisk.revertriskcli import EXIT_FAILURE, EXIT_OK
from revertrisk.revertriskexceptions import RevertRiskError

__author__ = '''Revertrisk Maintainers <revertrisk-maintainers@users.noreply.github.com>'''
__docformat__ = '''google'''
__date__ = '''12-02-2024'''
__copyright__ = '''Copyright 2024, Revertrisk Maintainers'''
__credits__ = ["Revertrisk Maintainers"]
__license__ = '''MIT'''
__maintainer__ = '''Revertrisk Maintainers'''
__email__ = '''<revertrisk-maintainers@users.noreply.github.com>'''
__status__ = '''Development'''  # "Prototype", "Development", "Production".

# This is the main prefix used for logging
LOGGER_BASENAME = '''revert_risk_cli'''
LOGGER = logging.getLogger(LOGGER_BASENAME)
LOGGER.addHandler(logging.NullHandler())


def report(command_report, ledger, to_json=False):
    """Report to table or json."""
    if command_report is None:
        return None
    if to_json:
        print(json.dumps(command_report.data, indent=2, sort_keys=True, default=str))
        return None
    print(command_report.table)
    if ledger.entries:
        table_data = [['Stage', 'Records in', 'Records out', 'Dropped']]
        table_data.extend(ledger.report_table)
        print(AsciiTable(table_data, 'Stages').table)
    return None


def main(arguments=None):
    """Main method."""
    args = get_arguments(arguments)
    setup_logging(args.log_level, args.logger_config)
    for noisy in ('urllib3', 'uvicorn.access'):
        logging.getLogger(noisy).setLevel(logging.WARNING)
    start_run_time = datetime.datetime.now()
    try:
        if not any([args.disable_banner, args.to_json]):
            print(text2art("Revert Risk"))
        configuration = load_configuration(args.config, configuration_overrides(args))
        ledger = StageLedger()
        command = COMMANDS[args.command]
        if args.command == 'serve':
            command_report = command(args, configuration, ledger)
        else:
            command_report = run_with_spinner(f'Please wait while running {args.command}...',
                                              lambda: command(args, configuration, ledger),
                                              args.log_level,
                                              disable_spinner=args.disable_spinner or args.to_json)
        report(command_report, ledger, args.to_json)
        LOGGER.info(f'{args.command} finished in {datetime.datetime.now() - start_run_time}.')
        status_code = EXIT_OK
    except RevertRiskError as msg:
        LOGGER.error(msg)
        status_code = exit_code_for(msg)
    except Exception as msg:  # pylint: disable=broad-except
        LOGGER.exception(msg)
        status_code = EXIT_FAILURE
    return status_code


if __name__ == '__main__':
    raise SystemExit(main())
