# Test wiring: lets plain pytest run the Django TestCase suites the same way
# `python manage.py test` would (settings, app registry, test database).
import os

import django
import pytest

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'deis_lab.settings')
django.setup()


@pytest.fixture(scope='session', autouse=True)
def _django_test_database():
    from django.test.utils import setup_test_environment, teardown_test_environment
    from django.db import connection

    setup_test_environment()
    old_name = connection.settings_dict['NAME']
    connection.creation.create_test_db(verbosity=0, autoclobber=True)
    yield
    connection.creation.destroy_test_db(old_name, verbosity=0)
    teardown_test_environment()
